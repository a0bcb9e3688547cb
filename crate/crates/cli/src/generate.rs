use portfolio::problems::BppInstance;
use portfolio::LoadError;
use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` volumes drawn uniformly from the open interval (0, 1). Fails for
/// `n = 0`.
pub fn random_bpp(n: usize, seed: u64) -> Result<BppInstance, LoadError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let volumes: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
    BppInstance::new(volumes)
}
