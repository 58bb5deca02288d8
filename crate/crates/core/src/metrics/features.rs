//! Sparse item feature vectors for content-based similarity.
//!
//! Each item maps to three concatenated blocks — one-hot category, one-hot
//! subcategory, term frequencies of title+snippet tokens — with every
//! non-empty block ℓ2-normalized, so no block dominates pairwise cosine.

use std::collections::BTreeMap;

use crate::corpus::{Catalog, NewsItem};

/// Dimension layout shared by all vectors built from one catalog.
#[derive(Debug, Clone)]
pub struct FeatureIndex {
    categories: BTreeMap<String, u32>,
    subcategories: BTreeMap<String, u32>,
    tokens: BTreeMap<String, u32>,
}

impl FeatureIndex {
    /// Collect every category, subcategory, and token in the catalog.
    /// Slots are assigned in sorted order, so the layout is a pure function
    /// of the catalog contents.
    pub fn build(catalog: &Catalog) -> FeatureIndex {
        let mut categories = BTreeMap::new();
        let mut subcategories = BTreeMap::new();
        let mut tokens = BTreeMap::new();
        for item in catalog.values() {
            let next = categories.len() as u32;
            categories.entry(item.category.clone()).or_insert(next);
            if !item.subcategory.is_empty() {
                let next = subcategories.len() as u32;
                subcategories.entry(item.subcategory.clone()).or_insert(next);
            }
            for tok in item.text_tokens() {
                let next = tokens.len() as u32;
                tokens.entry(tok).or_insert(next);
            }
        }
        // BTreeMap insertion order shuffles values; reassign slots in key order.
        for (slot, v) in categories.values_mut().enumerate() {
            *v = slot as u32;
        }
        for (slot, v) in subcategories.values_mut().enumerate() {
            *v = slot as u32;
        }
        for (slot, v) in tokens.values_mut().enumerate() {
            *v = slot as u32;
        }
        FeatureIndex {
            categories,
            subcategories,
            tokens,
        }
    }

    pub fn dims(&self) -> usize {
        self.categories.len() + self.subcategories.len() + self.tokens.len()
    }

    /// Build the normalized sparse vector for one item. Labels or tokens
    /// missing from the index (item from outside the catalog the index was
    /// built on) are skipped.
    pub fn vector(&self, item: &NewsItem) -> ItemFeatureVector {
        let sub_base = self.categories.len() as u32;
        let tok_base = sub_base + self.subcategories.len() as u32;
        let mut components: Vec<(u32, f64)> = Vec::new();

        if let Some(&slot) = self.categories.get(&item.category) {
            components.push((slot, 1.0)); // one-hot: already unit norm
        }
        if !item.subcategory.is_empty() {
            if let Some(&slot) = self.subcategories.get(&item.subcategory) {
                components.push((sub_base + slot, 1.0));
            }
        }

        let mut tf: BTreeMap<u32, f64> = BTreeMap::new();
        for tok in item.text_tokens() {
            if let Some(&slot) = self.tokens.get(&tok) {
                *tf.entry(tok_base + slot).or_insert(0.0) += 1.0;
            }
        }
        let norm = tf.values().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            components.extend(tf.into_iter().map(|(slot, v)| (slot, v / norm)));
        }

        components.sort_by_key(|&(slot, _)| slot);
        ItemFeatureVector { components }
    }

    /// Vectors for every catalog item, keyed by id.
    pub fn vectorize_catalog(&self, catalog: &Catalog) -> BTreeMap<String, ItemFeatureVector> {
        catalog
            .iter()
            .map(|(id, item)| (id.clone(), self.vector(item)))
            .collect()
    }
}

/// A sparse non-negative feature vector; component indices are strictly
/// increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemFeatureVector {
    components: Vec<(u32, f64)>,
}

impl ItemFeatureVector {
    pub fn components(&self) -> &[(u32, f64)] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Cosine similarity via sparse merge join. Zero vectors have
    /// similarity 0 with everything.
    pub fn cosine(&self, other: &ItemFeatureVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut dot = 0.0;
        while i < self.components.len() && j < other.components.len() {
            let (a_idx, a_val) = self.components[i];
            let (b_idx, b_val) = other.components[j];
            match a_idx.cmp(&b_idx) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += a_val * b_val;
                    i += 1;
                    j += 1;
                }
            }
        }
        let denom = self.norm() * other.norm();
        if denom > 0.0 {
            dot / denom
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(id: &str, cat: &str, sub: &str, title: &str, snippet: &str) -> NewsItem {
        NewsItem {
            item_id: id.into(),
            category: cat.into(),
            subcategory: sub.into(),
            title: title.into(),
            snippet: snippet.into(),
        }
    }

    fn catalog(items: Vec<NewsItem>) -> Catalog {
        items.into_iter().map(|i| (i.item_id.clone(), i)).collect()
    }

    #[test]
    fn identical_items_have_cosine_one() {
        let cat = catalog(vec![
            item("a", "sports", "football", "big match", "teams played"),
            item("b", "sports", "football", "big match", "teams played"),
        ]);
        let index = FeatureIndex::build(&cat);
        let va = index.vector(&cat["a"]);
        let vb = index.vector(&cat["b"]);
        assert!((va.cosine(&vb) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_items_have_cosine_zero() {
        let cat = catalog(vec![
            item("a", "sports", "football", "match report", ""),
            item("b", "finance", "stocks", "market update", ""),
        ]);
        let index = FeatureIndex::build(&cat);
        assert_eq!(index.vector(&cat["a"]).cosine(&index.vector(&cat["b"])), 0.0);
    }

    #[test]
    fn each_block_is_unit_norm() {
        let cat = catalog(vec![item("a", "sports", "football", "goal goal goal", "late goal")]);
        let index = FeatureIndex::build(&cat);
        let v = index.vector(&cat["a"]);
        // Three unit-norm blocks: category, subcategory, tokens.
        assert!((v.norm() - 3.0_f64.sqrt()).abs() < 1e-12);
        // Token block: tf(goal)=4, tf(late)=1, norm sqrt(17).
        let tok_vals: Vec<f64> = v
            .components()
            .iter()
            .filter(|(idx, _)| *idx >= 2)
            .map(|(_, val)| *val)
            .collect();
        let expected = [4.0 / 17.0_f64.sqrt(), 1.0 / 17.0_f64.sqrt()];
        assert_eq!(tok_vals.len(), 2);
        // Slots are alphabetical: "goal" then "late".
        assert!((tok_vals[0] - expected[0]).abs() < 1e-12);
        assert!((tok_vals[1] - expected[1]).abs() < 1e-12);
    }

    #[test]
    fn empty_subcategory_omits_the_block() {
        let cat = catalog(vec![item("a", "sports", "", "title", "snippet")]);
        let index = FeatureIndex::build(&cat);
        let v = index.vector(&cat["a"]);
        assert!((v.norm() - 2.0_f64.sqrt()).abs() < 1e-12, "category + token blocks only");
    }

    #[test]
    fn same_category_different_text_is_partially_similar() {
        let cat = catalog(vec![
            item("a", "sports", "football", "alpha beta", ""),
            item("b", "sports", "tennis", "gamma delta", ""),
        ]);
        let index = FeatureIndex::build(&cat);
        let cos = index.vector(&cat["a"]).cosine(&index.vector(&cat["b"]));
        // Shared category block only: dot = 1, norms sqrt(3) each.
        assert!((cos - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn layout_is_deterministic() {
        let cat = catalog(vec![
            item("a", "zeta", "z1", "zz yy", ""),
            item("b", "alpha", "a1", "aa bb", ""),
        ]);
        let i1 = FeatureIndex::build(&cat);
        let i2 = FeatureIndex::build(&cat);
        assert_eq!(i1.vector(&cat["a"]), i2.vector(&cat["a"]));
        assert_eq!(i1.dims(), 2 + 2 + 4);
    }
}
