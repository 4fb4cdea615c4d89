//! Phase iteration shared by the histogram and Birkhoff-sum estimators.

use crate::family::AtomSampler;
use crate::mat2::Mat2;
use crate::math;
use crate::rng::ChainRng;

const RENORM: u64 = 32;

/// Applies `steps` random matrices to `v`, calling `visit` with the
/// (unnormalized) vector after each step. Returns the final unit vector.
pub(crate) fn walk(
    mats: &[Mat2],
    sampler: &AtomSampler,
    rng: &mut ChainRng,
    mut v: [f64; 2],
    steps: u64,
    mut visit: impl FnMut([f64; 2]),
) -> [f64; 2] {
    for n in 0..steps {
        let t = &mats[sampler.sample(rng.uniform())];
        v = t.mul_vec(v);
        visit(v);
        if (n + 1) % RENORM == 0 {
            let r = math::hypot(v[0], v[1]);
            v = [v[0] / r, v[1] / r];
        }
    }
    let r = math::hypot(v[0], v[1]);
    [v[0] / r, v[1] / r]
}

/// Start vector `e_θ` with θ uniform on the circle.
pub(crate) fn random_start(rng: &mut ChainRng) -> [f64; 2] {
    let th = core::f64::consts::TAU * rng.uniform();
    [math::cos(th), math::sin(th)]
}
