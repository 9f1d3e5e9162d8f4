//! Seeded samplers for group elements and ball points.
//!
//! Every sampler takes an explicit RNG so callers control determinism; the
//! suite and the tests use [`seeded`] with a fixed seed.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermitian::{BallPoint, Flavor, GroupElement, C64, ONE, ZERO};
use crate::spectral::normal_form;

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_c(rng: &mut SampleRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed `n x n` unitary (QR of a complex Ginibre matrix with
/// the phases of `R`'s diagonal divided out).
pub fn random_unitary(n: usize, rng: &mut SampleRng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian_c(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `diag(U, conj(det U))`, an element of the stabilizer of the origin in
/// `SU(n,1)`.
pub fn random_compact(n: usize, rng: &mut SampleRng) -> GroupElement {
    let u = random_unitary(n, rng);
    let det = u.determinant();
    let mut m = DMatrix::<C64>::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&u);
    m[(n, n)] = det.conj() / det.norm_sqr();
    GroupElement::from_trusted(m, Flavor::SU)
}

/// Boost of rapidity `t` mixing coordinate `axis` with the last one.
pub fn boost(n: usize, axis: usize, t: f64) -> GroupElement {
    let mut m = DMatrix::<C64>::identity(n + 1, n + 1);
    let (ch, sh) = (C64::new(t.cosh(), 0.0), C64::new(t.sinh(), 0.0));
    m[(axis, axis)] = ch;
    m[(n, n)] = ch;
    m[(axis, n)] = sh;
    m[(n, axis)] = sh;
    GroupElement::from_trusted(m, Flavor::SU)
}

/// `K_1 * boost(t) * K_2` with `t` uniform in `[0, max_rapidity]` (Cartan
/// decomposition).
pub fn random_su(n: usize, max_rapidity: f64, rng: &mut SampleRng) -> GroupElement {
    let k1 = random_compact(n, rng);
    let t = rng.random_range(0.0..max_rapidity);
    let k2 = random_compact(n, rng);
    k1.compose(&boost(n, 0, t)).compose(&k2)
}

/// Uniform direction, radius uniform in `[0, max_radius)`.
pub fn random_ball_point(n: usize, max_radius: f64, rng: &mut SampleRng) -> BallPoint {
    let dir: Vec<C64> = (0..n).map(|_| gaussian_c(rng)).collect();
    let norm = dir.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let rho = rng.random_range(0.0..max_radius);
    let coords = if norm > 0.0 {
        dir.iter().map(|x| x * (rho / norm)).collect()
    } else {
        vec![ZERO; n]
    };
    BallPoint::new(coords).expect("radius below one")
}

/// `M gamma(lambda) M^{-1}` for random `M` in `SU(2,1)`.
pub fn random_hyperbolic(lambda: f64, max_rapidity: f64, rng: &mut SampleRng) -> GroupElement {
    let m = random_su(2, max_rapidity, rng);
    normal_form(lambda)
        .expect("caller supplies |lambda| > 1")
        .conjugate_by(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::EPS_GRP;

    #[test]
    fn samples_are_group_elements() {
        let mut rng = seeded(11);
        for n in 1..4 {
            for _ in 0..20 {
                let g = random_su(n, 2.0, &mut rng);
                assert!(g.residual() < 1e-12, "residual {}", g.residual());
            }
        }
        let h = random_hyperbolic(2.5, 1.0, &mut rng);
        assert!(h.residual() < EPS_GRP);
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = random_su(2, 1.0, &mut seeded(3));
        let b = random_su(2, 1.0, &mut seeded(3));
        assert_eq!(a, b);
    }

    #[test]
    fn ball_points_inside() {
        let mut rng = seeded(5);
        for _ in 0..100 {
            assert!(random_ball_point(2, 0.95, &mut rng).norm_sqr() < 0.95 * 0.95);
        }
    }
}
