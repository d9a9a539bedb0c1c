//! Geometry of the upper half-plane under the Theta group: generator maps,
//! membership in the fundamental domain `D_Θ`, the fly-catcher height
//! algorithm and reduction words.

use std::fmt;

use rayon::prelude::*;

use crate::error::{HfError, Result};
use crate::real::C64;

/// Tolerance for deciding that a point lies on `∂D_Θ`.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    value: C64,
}

impl HPoint {
    pub fn new(value: C64) -> Result<Self> {
        if value.im > 0.0 && value.re.is_finite() && value.im.is_finite() {
            Ok(HPoint { value })
        } else {
            Err(HfError::DomainError(format!(
                "{value} is not in the upper half-plane"
            )))
        }
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(C64::new(re, im))
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Elementary maps of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    /// `τ ↦ −1/τ`
    S,
    /// `τ ↦ τ + 1`
    T,
    /// `τ ↦ τ + 2`
    T2,
    /// `τ ↦ 1/τ̄`
    SStar,
    /// `τ ↦ −τ̄`
    RStar,
    /// `τ ↦ τ − 2k` with `−1 ≤ Re < 1`
    Mod2,
}

/// `τ − 2k` with real part in `[−1, 1)`.
pub fn mod2(tau: C64) -> C64 {
    let k = ((tau.re + 1.0) / 2.0).floor();
    let mut re = tau.re - 2.0 * k;
    if re >= 1.0 {
        re -= 2.0;
    } else if re < -1.0 {
        re += 2.0;
    }
    C64::new(re, tau.im)
}

/// `mod₂` together with the `k` of the shift `τ ↦ τ − 2k`.
fn mod2_shift(tau: C64) -> (i64, C64) {
    let z = mod2(tau);
    (((tau.re - z.re) / 2.0).round() as i64, z)
}

pub fn apply_map(m: MapKind, tau: HPoint) -> HPoint {
    let z = tau.value;
    let w = match m {
        MapKind::S => -1.0 / z,
        MapKind::T => z + 1.0,
        MapKind::T2 => z + 2.0,
        MapKind::SStar => 1.0 / z.conj(),
        MapKind::RStar => -z.conj(),
        MapKind::Mod2 => mod2(z),
    };
    HPoint { value: w }
}

/// Position of a point relative to `D_Θ = {|Re τ| < 1, |τ| > 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

pub fn in_dtheta(tau: HPoint) -> Membership {
    let z = tau.value;
    let a = z.re.abs();
    let r = z.norm();
    if a > 1.0 + BOUNDARY_TOL || r < 1.0 - BOUNDARY_TOL {
        Membership::Outside
    } else if a < 1.0 - BOUNDARY_TOL && r > 1.0 + BOUNDARY_TOL {
        Membership::Interior
    } else {
        Membership::Boundary
    }
}

/// The lifted Gauss map used by the height iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaussMap {
    /// `g*₂ = mod₂ ∘ S*`
    Reflected,
    /// `g₂ = mod₂ ∘ S`
    Plain,
}

/// Outcome of the fly-catcher algorithm.
#[derive(Clone, Debug)]
pub struct Height {
    pub n: usize,
    /// `τ₀ = mod₂(τ), τ₁, …, τ_N`.
    pub orbit: Vec<HPoint>,
    pub is_mesh: bool,
}

/// Step cap `⌈1 + 1/Im τ⌉` that the height can never exceed.
pub fn height_cap(tau: HPoint) -> usize {
    (1.0 + 1.0 / tau.im()).ceil() as usize
}

pub fn flycatcher_height(tau: HPoint) -> Result<Height> {
    flycatcher_with(tau, GaussMap::Reflected)
}

pub fn flycatcher_with(tau: HPoint, map: GaussMap) -> Result<Height> {
    let cap = height_cap(tau);
    let mut z = mod2(tau.value);
    let mut orbit = vec![HPoint { value: z }];
    let mut n = 0usize;
    while z.norm() < 1.0 - BOUNDARY_TOL {
        if n >= cap {
            return Err(HfError::AlgorithmError(format!(
                "height iteration at {tau} exceeded {cap} steps"
            )));
        }
        let w = match map {
            GaussMap::Reflected => 1.0 / z.conj(),
            GaussMap::Plain => -1.0 / z,
        };
        z = mod2(w);
        orbit.push(HPoint { value: z });
        n += 1;
    }
    let is_mesh = in_dtheta(HPoint { value: z }) == Membership::Boundary;
    Ok(Height { n, orbit, is_mesh })
}

/// Mean of the height over `t ∈ [−1, 1]` at height `y`, midpoint rule.
pub fn average_height(y: f64, points: usize) -> Result<f64> {
    if !(y > 0.0) || points == 0 {
        return Err(HfError::InvalidInput(
            "average height needs y > 0 and at least one point".into(),
        ));
    }
    let h = 2.0 / points as f64;
    let total: Result<usize> = (0..points)
        .into_par_iter()
        .map(|j| {
            let t = -1.0 + (j as f64 + 0.5) * h;
            Ok(flycatcher_height(HPoint::from_parts(t, y)?)?.n)
        })
        .sum();
    Ok(total? as f64 / points as f64)
}

/// `π^{−2} log²(1/y)`, the leading term of the average height.
pub fn average_height_leading(y: f64) -> f64 {
    let l = (1.0 / y).ln();
    l * l / (std::f64::consts::PI * std::f64::consts::PI)
}

/// Growth gauge `M(τ) = max{1, |τ|²}/Im τ`.
pub fn big_m(tau: HPoint) -> f64 {
    tau.value.norm_sqr().max(1.0) / tau.im()
}

/// A letter of a modular word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    S,
    /// `T^k`
    T(i64),
}

/// A Möbius map given both as a word in `S`, `T` and as its integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaWord {
    pub matrix: [[i128; 2]; 2],
    /// Letters in composition order: the first letter is applied last.
    pub letters: Vec<Letter>,
}

fn matmul(a: [[i128; 2]; 2], b: [[i128; 2]; 2]) -> Result<[[i128; 2]; 2]> {
    let mut out = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0i128;
            for k in 0..2 {
                s = a[i][k]
                    .checked_mul(b[k][j])
                    .and_then(|p| s.checked_add(p))
                    .ok_or_else(|| HfError::AlgorithmError("word matrix overflow".into()))?;
            }
            out[i][j] = s;
        }
    }
    Ok(out)
}

impl ThetaWord {
    pub fn identity() -> Self {
        ThetaWord {
            matrix: [[1, 0], [0, 1]],
            letters: Vec::new(),
        }
    }

    fn letter_matrix(l: Letter) -> [[i128; 2]; 2] {
        match l {
            Letter::S => [[0, -1], [1, 0]],
            Letter::T(k) => [[1, k as i128], [0, 1]],
        }
    }

    /// Builds a word from letters listed in composition order.
    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        let mut w = Self::identity();
        for &l in letters {
            w.push_right(l)?;
        }
        Ok(w)
    }

    /// `self ∘ letter`.
    pub fn push_right(&mut self, l: Letter) -> Result<()> {
        if l == Letter::T(0) {
            return Ok(());
        }
        self.matrix = matmul(self.matrix, Self::letter_matrix(l))?;
        match (self.letters.last_mut(), l) {
            (Some(Letter::T(a)), Letter::T(b)) => {
                *a += b;
                if *a == 0 {
                    self.letters.pop();
                }
            }
            (Some(Letter::S), Letter::S) => {
                self.letters.pop();
            }
            _ => self.letters.push(l),
        }
        Ok(())
    }

    /// Number of `S` letters.
    pub fn word_length(&self) -> usize {
        self.letters.iter().filter(|l| **l == Letter::S).count()
    }

    pub fn det(&self) -> i128 {
        let m = self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// True when the matrix is congruent to the identity or to the
    /// antidiagonal matrix modulo 2.
    pub fn is_theta(&self) -> bool {
        let p: Vec<i128> = self
            .matrix
            .iter()
            .flatten()
            .map(|x| x.rem_euclid(2))
            .collect();
        p == [1, 0, 0, 1] || p == [0, 1, 1, 0]
    }

    pub fn apply(&self, tau: C64) -> C64 {
        let m = self.matrix;
        let (a, b, c, d) = (
            m[0][0] as f64,
            m[0][1] as f64,
            m[1][0] as f64,
            m[1][1] as f64,
        );
        (tau * a + b) / (tau * c + d)
    }

    /// Applies the letters one at a time, which is better conditioned than
    /// the matrix for long words.
    pub fn apply_letters(&self, tau: C64) -> C64 {
        let mut z = tau;
        for l in self.letters.iter().rev() {
            z = match *l {
                Letter::S => -1.0 / z,
                Letter::T(k) => z + k as f64,
            };
        }
        z
    }
}

impl fmt::Display for ThetaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "id");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| match l {
                Letter::S => "S".to_string(),
                Letter::T(k) => format!("T^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Result of reducing a point into the closed fundamental domain.
#[derive(Clone, Debug)]
pub struct TileReduction {
    /// `γ` with `γ(τ₀) = τ`.
    pub gamma: ThetaWord,
    pub tau0: HPoint,
    pub is_mesh: bool,
}

/// Finds `γ ∈ Γ_Θ` and `τ₀ ∈ D̄_Θ` with `γ(τ₀) = τ` along the `g₂` orbit.
pub fn reduce_to_tile(tau: HPoint) -> Result<TileReduction> {
    let cap = height_cap(tau);
    let mut gamma = ThetaWord::identity();
    let (k, mut z) = mod2_shift(tau.value);
    gamma.push_right(Letter::T(2 * k))?;
    let mut n = 0usize;
    while z.norm() < 1.0 - BOUNDARY_TOL {
        if n >= cap {
            return Err(HfError::AlgorithmError(format!(
                "tile reduction at {tau} exceeded {cap} steps"
            )));
        }
        gamma.push_right(Letter::S)?;
        let (k, w) = mod2_shift(-1.0 / z);
        gamma.push_right(Letter::T(2 * k))?;
        z = w;
        n += 1;
    }
    let tau0 = HPoint::new(z)?;
    Ok(TileReduction {
        gamma,
        tau0,
        is_mesh: in_dtheta(tau0) == Membership::Boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hp(re: f64, im: f64) -> HPoint {
        HPoint::from_parts(re, im).unwrap()
    }

    #[test]
    fn generator_examples() {
        assert!((apply_map(MapKind::S, hp(0.0, 1.0)).value() - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(
            apply_map(MapKind::Mod2, hp(3.5, 1.0)).value(),
            C64::new(-0.5, 1.0)
        );
        assert_eq!(
            apply_map(MapKind::Mod2, hp(1.0, 1.0)).value(),
            C64::new(-1.0, 1.0)
        );
        assert_eq!(
            apply_map(MapKind::Mod2, hp(-1.0, 1.0)).value(),
            C64::new(-1.0, 1.0)
        );
        assert_eq!(
            apply_map(MapKind::T2, hp(0.25, 1.0)).value(),
            C64::new(2.25, 1.0)
        );
    }

    #[test]
    fn rejects_points_off_the_half_plane() {
        assert!(HPoint::from_parts(0.0, 0.0).is_err());
        assert!(HPoint::from_parts(0.0, -1.0).is_err());
    }

    #[test]
    fn membership_examples() {
        assert_eq!(in_dtheta(hp(0.0, 2.0)), Membership::Interior);
        let rho = C64::from_polar(1.0, std::f64::consts::PI / 3.0);
        assert_eq!(in_dtheta(HPoint::new(rho).unwrap()), Membership::Boundary);
        assert_eq!(in_dtheta(hp(0.0, 0.5)), Membership::Outside);
        assert_eq!(in_dtheta(hp(-1.0, 3.0)), Membership::Boundary);
    }

    #[test]
    fn height_examples() {
        let h = flycatcher_height(hp(0.0, 2.0)).unwrap();
        assert_eq!(h.n, 0);
        let h = flycatcher_height(hp(0.0, 0.5)).unwrap();
        assert_eq!(h.n, 1);
        assert_eq!(h.orbit.len(), 2);
        assert!((h.orbit[0].value() - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((h.orbit[1].value() - C64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(!h.is_mesh);
        assert!(flycatcher_height(hp(0.0, 1.0)).unwrap().is_mesh);
    }

    #[test]
    fn big_m_examples() {
        assert_eq!(big_m(hp(0.0, 1.0)), 1.0);
        assert_eq!(big_m(hp(0.0, 2.0)), 2.0);
        let t = hp(0.3, 0.4);
        let s = apply_map(MapKind::S, t);
        assert!((big_m(s) - big_m(t)).abs() < 1e-14 * big_m(t));
    }

    #[test]
    fn reduction_examples() {
        let r = reduce_to_tile(hp(0.2, 3.0)).unwrap();
        assert_eq!(r.gamma, ThetaWord::identity());
        let r = reduce_to_tile(hp(0.0, 0.5)).unwrap();
        assert_eq!(r.gamma.letters, vec![Letter::S]);
        assert!((r.tau0.value() - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn random_word_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut letters = Vec::new();
            for j in 0..5 {
                let mut k = 0;
                while k == 0 {
                    k = rng.gen_range(-2i64..=2);
                }
                if j > 0 {
                    letters.push(Letter::S);
                }
                letters.push(Letter::T(2 * k));
            }
            let g = ThetaWord::from_letters(&letters).unwrap();
            assert_eq!(g.det(), 1);
            assert!(g.is_theta());
            let base = C64::new(0.0, 1.5);
            let tau = HPoint::new(g.apply_letters(base)).unwrap();
            let r = reduce_to_tile(tau).unwrap();
            assert_eq!(r.gamma.word_length(), 4, "{g} vs {}", r.gamma);
            assert!((r.tau0.value() - base).norm() < 1e-10);
            assert!(
                (r.gamma.apply(r.tau0.value()) - tau.value()).norm() < 1e-9 * tau.im().max(1.0)
            );
            assert_eq!(flycatcher_height(tau).unwrap().n, 4);
        }
    }

    #[test]
    fn involutions_and_factorisation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t = hp(rng.gen_range(-3.0..3.0), rng.gen_range(0.01..3.0));
            let ss = apply_map(MapKind::S, apply_map(MapKind::S, t));
            assert!((ss.value() - t.value()).norm() < 1e-14 * t.value().norm().max(1.0));
            let tt = apply_map(MapKind::SStar, apply_map(MapKind::SStar, t));
            assert!((tt.value() - t.value()).norm() < 1e-14 * t.value().norm().max(1.0));
            let a = apply_map(MapKind::S, t);
            let b = apply_map(MapKind::SStar, apply_map(MapKind::RStar, t));
            assert!((a.value() - b.value()).norm() < 1e-14 * a.value().norm().max(1.0));
        }
    }

    #[test]
    fn plain_and_reflected_heights_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let t = hp(
                rng.gen_range(-1.0..1.0),
                10f64.powf(rng.gen_range(-3.0..0.5)),
            );
            let a = flycatcher_with(t, GaussMap::Reflected).unwrap();
            let b = flycatcher_with(t, GaussMap::Plain).unwrap();
            if !a.is_mesh && !b.is_mesh {
                assert_eq!(a.n, b.n, "at {t}");
            }
        }
    }

    #[test]
    fn orbit_climbs_and_height_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let y = 10f64.powf(rng.gen_range(-4.0..1.0));
            let t = hp(rng.gen_range(-4.0..4.0), y);
            let h = flycatcher_height(t).unwrap();
            assert!(h.n as f64 <= 0.5 + 0.5 / y + 1e-9);
            for w in h.orbit.windows(2) {
                assert!(w[1].im() > w[0].im());
            }
        }
    }

    #[test]
    fn average_height_tracks_leading_term() {
        let y = 1e-3;
        let mean = average_height(y, 4096).unwrap();
        let lead = average_height_leading(y);
        assert!((lead - 4.83).abs() < 0.01);
        assert!(
            (mean - lead).abs() <= (1.0 / y).ln(),
            "mean {mean} lead {lead}"
        );
    }
}
