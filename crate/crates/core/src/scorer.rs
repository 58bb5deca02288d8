//! The scoring interface every trained model exposes to evaluation.

/// A model that can score (user, item) pairs at a moment in time.
///
/// Scores induce rankings; when [`predicts_ratings`](ItemScorer::predicts_ratings)
/// is true they are additionally predicted ratings on the dataset scale and
/// may be compared against held-out explicit ratings.
pub trait ItemScorer {
    /// Score `item` for `user` at `timestamp`. Unknown users or items get
    /// the model's fallback (typically global terms only), never an error.
    fn score(&self, user_id: &str, item_id: &str, timestamp: i64) -> f64;

    /// Whether scores live on the rating scale (enables RMSE evaluation).
    fn predicts_ratings(&self) -> bool {
        false
    }
}

impl<T: ItemScorer + ?Sized> ItemScorer for &T {
    fn score(&self, user_id: &str, item_id: &str, timestamp: i64) -> f64 {
        (**self).score(user_id, item_id, timestamp)
    }

    fn predicts_ratings(&self) -> bool {
        (**self).predicts_ratings()
    }
}
