use sha2::{Digest, Sha256};

/// Platform-independent 64-bit hash of `(seed, key)`.
pub fn stable_hash(seed: u64, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest is 32 bytes"))
}

/// Deterministic Bernoulli draw keyed by `key`: true for roughly `rate` of keys.
pub fn keep_sample(seed: u64, key: &str, rate: f64) -> bool {
    if rate >= 1.0 {
        return true;
    }
    if rate <= 0.0 {
        return false;
    }
    (stable_hash(seed, key) as f64) < rate * (u64::MAX as f64)
}
