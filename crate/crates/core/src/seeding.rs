//! Stable derivation of per-trial RNG seeds.
//!
//! Sweeps and estimator loops need one independent seed per (n, q, trial)
//! cell that never changes across runs, platforms, or thread schedules. The
//! derivation is a fixed bijective mix of the master seed XORed with a bit
//! packing of the coordinates, so distinct triples map to distinct seeds as
//! long as they stay inside the documented ranges.

/// Finalizing mix of the splitmix64 generator; a bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Largest board side accepted by [`derive_seed`].
pub const MAX_SEED_N: usize = 1 << 12;
/// Largest color count accepted by [`derive_seed`].
pub const MAX_SEED_Q: u32 = 1 << 12;
/// Largest trial index accepted by [`derive_seed`].
pub const MAX_SEED_TRIAL: u64 = 1 << 40;

/// Seed for trial `trial` of the cell `(n, q)` under `master`.
///
/// Distinct `(n, q, trial)` triples give distinct seeds for a fixed master
/// seed: the packing `n << 52 | q << 40 | trial` is injective below the
/// [`MAX_SEED_N`] / [`MAX_SEED_Q`] / [`MAX_SEED_TRIAL`] bounds and the mix
/// is a bijection.
pub fn derive_seed(master: u64, n: usize, q: u32, trial: u64) -> u64 {
    assert!(n < MAX_SEED_N, "derive_seed supports n below {MAX_SEED_N}");
    assert!(q < MAX_SEED_Q, "derive_seed supports q below {MAX_SEED_Q}");
    assert!(
        trial < MAX_SEED_TRIAL,
        "derive_seed supports trials below {MAX_SEED_TRIAL}"
    );
    let packed = ((n as u64) << 52) | ((q as u64) << 40) | trial;
    mix64(mix64(master) ^ packed)
}
