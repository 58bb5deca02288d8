//! Matrix factorization with calendar-time biases, trained by SGD.
//!
//! The predicted engagement of user `u` with item `i` at time `t` is
//!
//! ```text
//! r(u, i, t) = mu + b_u + b_i + sum_g c_g[bin_g(t)] + d_cat(i) + d_sub(i) + p_u . q_i
//! ```
//!
//! where `g` ranges over the enabled calendar granularities (year down to
//! second), `d_cat`/`d_sub` are taxonomy biases looked up through the
//! catalog, and `p_u . q_i` is the latent-factor interaction. Any term
//! whose entity is unknown contributes zero, so cold users and items fall
//! back to the global terms gracefully.

mod decay;
mod train;

pub use decay::{decay_weight, train_decay, DecayModel, DEFAULT_HALF_LIFE_SECONDS};
pub use train::{train_sgd, TrainExample};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{decompose_timestamp, Catalog, ItemId, TimeDecomposition};
use crate::error::{Error, Result};
use crate::metrics::{top_k_by_score, RankedList};
use crate::scorer::ItemScorer;

/// Calendar units a time bias table can be attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Year,
    Month,
    DayOfWeek,
    Hour,
    Minute,
    Second,
}

impl Granularity {
    pub const ALL: [Granularity; 6] = [
        Granularity::Year,
        Granularity::Month,
        Granularity::DayOfWeek,
        Granularity::Hour,
        Granularity::Minute,
        Granularity::Second,
    ];

    /// Fixed table size, or `None` for the open-ended year table.
    pub fn bin_count(self) -> Option<usize> {
        match self {
            Granularity::Year => None,
            Granularity::Month => Some(12),
            Granularity::DayOfWeek => Some(7),
            Granularity::Hour => Some(24),
            Granularity::Minute => Some(60),
            Granularity::Second => Some(60),
        }
    }

    /// Bin index of a decomposed timestamp within this unit's table.
    /// Months are 1-based in the decomposition, 0-based in the table.
    /// The year unit has no fixed table; callers handle it separately.
    pub fn bin(self, td: &TimeDecomposition) -> Option<usize> {
        match self {
            Granularity::Year => None,
            Granularity::Month => Some(td.month as usize - 1),
            Granularity::DayOfWeek => Some(td.day_of_week as usize),
            Granularity::Hour => Some(td.hour as usize),
            Granularity::Minute => Some(td.minute as usize),
            Granularity::Second => Some(td.second as usize),
        }
    }

    pub fn parse(name: &str) -> Result<Granularity> {
        match name {
            "year" => Ok(Granularity::Year),
            "month" => Ok(Granularity::Month),
            "day_of_week" => Ok(Granularity::DayOfWeek),
            "hour" => Ok(Granularity::Hour),
            "minute" => Ok(Granularity::Minute),
            "second" => Ok(Granularity::Second),
            other => Err(Error::Config(format!("unknown time granularity `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Granularity::Year => "year",
            Granularity::Month => "month",
            Granularity::DayOfWeek => "day_of_week",
            Granularity::Hour => "hour",
            Granularity::Minute => "minute",
            Granularity::Second => "second",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyper-parameters for [`train_sgd`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfConfig {
    /// Latent dimensions; 0 trains a pure bias model.
    pub n_factors: usize,
    pub learning_rate: f64,
    /// L2 penalty applied to every updated parameter.
    pub l2_reg: f64,
    pub epochs: usize,
    /// Which calendar-time bias tables to learn.
    pub granularities: BTreeSet<Granularity>,
    pub use_category: bool,
    pub use_subcategory: bool,
    /// Factor init: Normal(0, init_scale / sqrt(n_factors)).
    pub init_scale: f64,
    /// Rating scale for clamped predictions; `None` (implicit targets)
    /// disables clamping and rating semantics.
    pub rating_bounds: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for MfConfig {
    fn default() -> Self {
        MfConfig {
            n_factors: 32,
            learning_rate: 0.005,
            l2_reg: 0.02,
            epochs: 20,
            granularities: BTreeSet::new(),
            use_category: false,
            use_subcategory: false,
            init_scale: 0.1,
            rating_bounds: Some((1.0, 5.0)),
            seed: 0,
        }
    }
}

impl MfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.l2_reg >= 0.0 && self.l2_reg.is_finite()) {
            return Err(Error::Config(format!("l2_reg must be non-negative, got {}", self.l2_reg)));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config(format!(
                "init_scale must be positive, got {}",
                self.init_scale
            )));
        }
        if let Some((lo, hi)) = self.rating_bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("invalid rating bounds ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// A reference to one learnable parameter, for introspection and
/// derivative checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamRef<'a> {
    UserBias(&'a str),
    ItemBias(&'a str),
    /// Fixed-size table entry: (unit, bin index). Not used for years.
    TimeBin(Granularity, usize),
    YearBias(i32),
    CategoryBias(&'a str),
    SubcategoryBias(&'a str),
    /// (user, factor index)
    UserFactor(&'a str, usize),
    /// (item, factor index)
    ItemFactor(&'a str, usize),
}

/// The trained model. Serializes to JSON; loading rebuilds the lookup
/// indexes and reproduces bit-identical predictions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MfModel {
    pub config: MfConfig,
    /// Global mean of the training targets; fixed during SGD.
    pub mu: f64,
    users: Vec<String>,
    items: Vec<String>,
    b_u: Vec<f64>,
    b_i: Vec<f64>,
    /// Fixed-size bias tables for the enabled non-year granularities.
    time_bins: BTreeMap<Granularity, Vec<f64>>,
    /// Year biases, keyed by calendar year; grows with the observed years.
    year_bias: BTreeMap<i32, f64>,
    categories: Vec<String>,
    d_cat: Vec<f64>,
    subcategories: Vec<String>,
    d_sub: Vec<f64>,
    /// Row-major (entity, factor) matrices.
    p: Vec<f64>,
    q: Vec<f64>,
    /// Training RMSE after each epoch.
    pub loss_trace: Vec<f64>,
    #[serde(skip)]
    user_idx: HashMap<String, usize>,
    #[serde(skip)]
    item_idx: HashMap<String, usize>,
    #[serde(skip)]
    cat_idx: HashMap<String, usize>,
    #[serde(skip)]
    sub_idx: HashMap<String, usize>,
}

impl MfModel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        config: MfConfig,
        mu: f64,
        users: Vec<String>,
        items: Vec<String>,
        b_u: Vec<f64>,
        b_i: Vec<f64>,
        time_bins: BTreeMap<Granularity, Vec<f64>>,
        year_bias: BTreeMap<i32, f64>,
        categories: Vec<String>,
        d_cat: Vec<f64>,
        subcategories: Vec<String>,
        d_sub: Vec<f64>,
        p: Vec<f64>,
        q: Vec<f64>,
        loss_trace: Vec<f64>,
    ) -> MfModel {
        let mut model = MfModel {
            config,
            mu,
            users,
            items,
            b_u,
            b_i,
            time_bins,
            year_bias,
            categories,
            d_cat,
            subcategories,
            d_sub,
            p,
            q,
            loss_trace,
            user_idx: HashMap::new(),
            item_idx: HashMap::new(),
            cat_idx: HashMap::new(),
            sub_idx: HashMap::new(),
        };
        model.reindex();
        model
    }

    pub(crate) fn reindex(&mut self) {
        self.user_idx = self.users.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        self.item_idx = self.items.iter().enumerate().map(|(i, it)| (it.clone(), i)).collect();
        self.cat_idx = self.categories.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        self.sub_idx = self.subcategories.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn knows_user(&self, user_id: &str) -> bool {
        self.user_idx.contains_key(user_id)
    }

    pub fn knows_item(&self, item_id: &str) -> bool {
        self.item_idx.contains_key(item_id)
    }

    /// Unclamped prediction. Used internally by training (gradients need
    /// the raw value) and by anything that wants scores free of the
    /// rating-scale clamp.
    pub fn predict_raw(&self, catalog: &Catalog, user_id: &str, item_id: &str, timestamp: i64) -> f64 {
        let td = decompose_timestamp(timestamp.max(0)).expect("non-negative timestamp decomposes");
        let mut r = self.mu;
        let user = self.user_idx.get(user_id).copied();
        let item = self.item_idx.get(item_id).copied();
        if let Some(u) = user {
            r += self.b_u[u];
        }
        if let Some(i) = item {
            r += self.b_i[i];
        }
        for (&g, table) in &self.time_bins {
            let bin = g.bin(&td).expect("year is not in time_bins");
            r += table[bin];
        }
        if self.config.granularities.contains(&Granularity::Year) {
            r += self.year_bias.get(&td.year).copied().unwrap_or(0.0);
        }
        if let Some(entry) = catalog.get(item_id) {
            if self.config.use_category {
                if let Some(&c) = self.cat_idx.get(&entry.category) {
                    r += self.d_cat[c];
                }
            }
            if self.config.use_subcategory && !entry.subcategory.is_empty() {
                if let Some(&s) = self.sub_idx.get(&entry.subcategory) {
                    r += self.d_sub[s];
                }
            }
        }
        if let (Some(u), Some(i)) = (user, item) {
            let k = self.config.n_factors;
            let pu = &self.p[u * k..(u + 1) * k];
            let qi = &self.q[i * k..(i + 1) * k];
            r += pu.iter().zip(qi).map(|(a, b)| a * b).sum::<f64>();
        }
        r
    }

    /// Prediction, clamped to the configured rating scale when one is set.
    pub fn predict(&self, catalog: &Catalog, user_id: &str, item_id: &str, timestamp: i64) -> f64 {
        let raw = self.predict_raw(catalog, user_id, item_id, timestamp);
        match self.config.rating_bounds {
            Some((lo, hi)) => raw.clamp(lo, hi),
            None => raw,
        }
    }

    /// Read one parameter; `None` when the referenced entity or slot does
    /// not exist in this model.
    pub fn param(&self, param: ParamRef<'_>) -> Option<f64> {
        self.param_location(param).map(|loc| *loc.resolve(self))
    }

    /// Mutate one parameter in place (testing and diagnostics).
    pub fn param_mut(&mut self, param: ParamRef<'_>) -> Option<&mut f64> {
        let loc = self.param_location(param)?;
        Some(loc.resolve_mut(self))
    }

    fn param_location(&self, param: ParamRef<'_>) -> Option<Loc> {
        match param {
            ParamRef::UserBias(u) => self.user_idx.get(u).map(|&i| Loc::BU(i)),
            ParamRef::ItemBias(it) => self.item_idx.get(it).map(|&i| Loc::BI(i)),
            ParamRef::TimeBin(g, bin) => {
                let table = self.time_bins.get(&g)?;
                (bin < table.len()).then_some(Loc::Time(g, bin))
            }
            ParamRef::YearBias(y) => self.year_bias.contains_key(&y).then_some(Loc::Year(y)),
            ParamRef::CategoryBias(c) => self.cat_idx.get(c).map(|&i| Loc::Cat(i)),
            ParamRef::SubcategoryBias(s) => self.sub_idx.get(s).map(|&i| Loc::Sub(i)),
            ParamRef::UserFactor(u, f) => {
                let &i = self.user_idx.get(u)?;
                (f < self.config.n_factors).then_some(Loc::P(i * self.config.n_factors + f))
            }
            ParamRef::ItemFactor(it, f) => {
                let &i = self.item_idx.get(it)?;
                (f < self.config.n_factors).then_some(Loc::Q(i * self.config.n_factors + f))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<MfModel> {
        let mut model: MfModel = serde_json::from_str(text)?;
        model.reindex();
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<MfModel> {
        MfModel::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Internal resolved parameter address.
#[derive(Clone, Copy)]
enum Loc {
    BU(usize),
    BI(usize),
    Time(Granularity, usize),
    Year(i32),
    Cat(usize),
    Sub(usize),
    P(usize),
    Q(usize),
}

impl Loc {
    fn resolve(self, m: &MfModel) -> &f64 {
        match self {
            Loc::BU(i) => &m.b_u[i],
            Loc::BI(i) => &m.b_i[i],
            Loc::Time(g, b) => &m.time_bins[&g][b],
            Loc::Year(y) => &m.year_bias[&y],
            Loc::Cat(i) => &m.d_cat[i],
            Loc::Sub(i) => &m.d_sub[i],
            Loc::P(i) => &m.p[i],
            Loc::Q(i) => &m.q[i],
        }
    }

    fn resolve_mut(self, m: &mut MfModel) -> &mut f64 {
        match self {
            Loc::BU(i) => &mut m.b_u[i],
            Loc::BI(i) => &mut m.b_i[i],
            Loc::Time(g, b) => m.time_bins.get_mut(&g).expect("checked").get_mut(b).expect("checked"),
            Loc::Year(y) => m.year_bias.get_mut(&y).expect("checked"),
            Loc::Cat(i) => &mut m.d_cat[i],
            Loc::Sub(i) => &mut m.d_sub[i],
            Loc::P(i) => &mut m.p[i],
            Loc::Q(i) => &mut m.q[i],
        }
    }
}

/// Rank `candidates` for a user at a moment in time by clamped prediction.
///
/// Candidates must be distinct. Ties order by item id, so the result is a
/// deterministic function of model, catalog, and arguments.
pub fn recommend_top_k(
    model: &MfModel,
    catalog: &Catalog,
    user_id: &str,
    candidates: &[ItemId],
    timestamp: i64,
    k: usize,
) -> Result<RankedList> {
    let scored: Vec<(ItemId, f64)> = candidates
        .iter()
        .map(|item| (item.clone(), model.predict(catalog, user_id, item, timestamp)))
        .collect();
    let (items, scores) = top_k_by_score(scored, k);
    RankedList::new(user_id, items, scores)
}

/// Adapter pairing a model with the catalog it resolves taxonomy through.
pub struct MfScorer<'a> {
    pub model: &'a MfModel,
    pub catalog: &'a Catalog,
}

impl ItemScorer for MfScorer<'_> {
    fn score(&self, user_id: &str, item_id: &str, timestamp: i64) -> f64 {
        self.model.predict(self.catalog, user_id, item_id, timestamp)
    }

    fn predicts_ratings(&self) -> bool {
        self.model.config.rating_bounds.is_some()
    }
}
