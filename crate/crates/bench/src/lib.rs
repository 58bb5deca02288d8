//! Shared fixtures for the criterion benches: a mid-sized synthetic
//! corpus and dense regression problems, all seeded so successive bench
//! runs measure the same work.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use newsrec_core::corpus::Dataset;
use newsrec_core::experiment::{generate_synthetic, SynthSpec};

/// Rating scale used by every bench corpus.
pub const RATING_SCALE: (f64, f64) = (1.0, 5.0);

/// A corpus big enough that per-interaction costs dominate setup costs.
pub fn rating_corpus() -> Dataset {
    let spec = SynthSpec {
        n_users: 200,
        n_items: 500,
        n_interactions: 20_000,
        ..SynthSpec::default()
    };
    generate_synthetic(&spec, RATING_SCALE, 42).expect("valid bench spec").0
}

/// The same shape of corpus, but all clicks — for the implicit path.
pub fn click_corpus() -> Dataset {
    let spec = SynthSpec {
        n_users: 200,
        n_items: 500,
        n_interactions: 20_000,
        explicit_prob: 0.0,
        ..SynthSpec::default()
    };
    generate_synthetic(&spec, RATING_SCALE, 42).expect("valid bench spec").0
}

/// A dense least-squares problem with correlated columns and a sparse
/// true weight vector — the regime coordinate descent is built for.
pub fn regression_problem(rows: usize, cols: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
    let mut w = DVector::zeros(cols);
    for j in (0..cols).step_by(5) {
        w[j] = rng.gen_range(-2.0..2.0f64);
    }
    let noise = DVector::from_fn(rows, |_, _| rng.gen_range(-0.05..0.05));
    let y = &x * &w + noise;
    (x, y)
}
