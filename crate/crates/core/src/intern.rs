//! String interning shared by the trainers.

use std::collections::HashMap;

/// Interning helper: first-seen order, so indices are a deterministic
/// function of the example sequence.
pub(crate) struct Interner {
    pub(crate) names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    pub(crate) fn new() -> Interner {
        Interner {
            names: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub(crate) fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }
}
