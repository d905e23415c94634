//! Shared helpers for unit tests.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::zscore::DataMatrix;

pub(crate) fn random_data(seed: u64, n: usize, p: usize) -> DataMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let values = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let labels = (0..p).map(|j| format!("v{:04}", j + 1)).collect();
    DataMatrix::new(values, labels).unwrap()
}
