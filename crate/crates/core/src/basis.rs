//! Index algebra for the Fourier spaces.
//!
//! A single drive lives on the integer ladder `n`. Two commensurate drives
//! with frequencies `ω₁ = N₁ω_B`, `ω₂ = N₂ω_B` live on the lattice `(n₁, n₂)`,
//! and every lattice point carries the total harmonic `n = n₁N₁ + n₂N₂`. The
//! translation `(n₁, n₂) ↦ (n₁ + N₂, n₂ - N₁)` moves along a line of constant
//! `n`; an [`OrbitBasis`] keeps a finite, cyclically closed stretch of each
//! such line.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("N1 = {0} and N2 = {1} are not coprime; reduce the frequency ratio first")]
    NotCoprime(i64, i64),
    #[error("mode integers and base frequency must be positive (N1 = {n1}, N2 = {n2}, omega_B = {omega_b})")]
    NonPositive { n1: i64, n2: i64, omega_b: f64 },
    #[error("empty index range {min}..={max}")]
    EmptyRange { min: i64, max: i64 },
}

/// Greatest common divisor and Bézout coefficients `(g, x, y)` with
/// `a·x + b·y = g`, from the extended Euclidean algorithm.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1, 0);
    let (mut old_t, mut t) = (0, 1);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Two commensurate drive frequencies `ω₁ = N₁ω_B`, `ω₂ = N₂ω_B` with
/// `gcd(N₁, N₂) = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModePair {
    n1: i64,
    n2: i64,
    omega_b: f64,
    /// Minimal-norm solution of `x·N₁ + y·N₂ = 1`.
    unit: (i64, i64),
}

impl ModePair {
    pub fn new(n1: i64, n2: i64, omega_b: f64) -> Result<Self, BasisError> {
        if n1 < 1 || n2 < 1 || !(omega_b > 0.0) || !omega_b.is_finite() {
            return Err(BasisError::NonPositive { n1, n2, omega_b });
        }
        let (g, x, y) = extended_gcd(n1, n2);
        if g != 1 {
            return Err(BasisError::NotCoprime(n1, n2));
        }
        Ok(Self { n1, n2, omega_b, unit: minimal_norm_solution(x, y, n1, n2) })
    }

    pub fn n1(&self) -> i64 {
        self.n1
    }

    pub fn n2(&self) -> i64 {
        self.n2
    }

    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }

    pub fn omega1(&self) -> f64 {
        self.n1 as f64 * self.omega_b
    }

    pub fn omega2(&self) -> f64 {
        self.n2 as f64 * self.omega_b
    }

    /// Common period `2π/ω_B`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega_b
    }

    /// `(n₁(1), n₂(1))`: the canonical lattice point of `n = 1`.
    pub fn unit_solution(&self) -> (i64, i64) {
        self.unit
    }

    /// Total harmonic `p·N₁ + q·N₂` of a coupling `(p, q)`.
    pub fn harmonic(&self, p: i64, q: i64) -> i64 {
        p * self.n1 + q * self.n2
    }
}

/// Convenience wrapper around [`ModePair::new`].
pub fn make_mode_pair(n1: i64, n2: i64, omega_b: f64) -> Result<ModePair, BasisError> {
    ModePair::new(n1, n2, omega_b)
}

/// Moves a Bézout solution along its family `(x + ℓN₂, y - ℓN₁)` to the member
/// of least `x² + y²`. Ties keep the input, then the smaller shift ℓ.
fn minimal_norm_solution(x: i64, y: i64, n1: i64, n2: i64) -> (i64, i64) {
    let norm = |l: i64| {
        let a = x + l * n2;
        let b = y - l * n1;
        a * a + b * b
    };
    // d/dℓ of the norm vanishes at ℓ* = (y N₁ - x N₂) / (N₁² + N₂²).
    let num = y * n1 - x * n2;
    let den = n1 * n1 + n2 * n2;
    let lo = num.div_euclid(den);
    let mut best = 0;
    for l in [lo, lo + 1] {
        if norm(l) < norm(best) {
            best = l;
        }
    }
    (x + best * n2, y - best * n1)
}

/// A point `(n₁, n₂)` of the two-mode Fourier lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub n1: i64,
    pub n2: i64,
}

impl LatticePoint {
    pub const fn new(n1: i64, n2: i64) -> Self {
        Self { n1, n2 }
    }

    /// Total harmonic `n₁N₁ + n₂N₂`.
    pub fn harmonic(&self, mp: &ModePair) -> i64 {
        mp.harmonic(self.n1, self.n2)
    }

    pub fn offset(&self, p: i64, q: i64) -> Self {
        Self { n1: self.n1 + p, n2: self.n2 + q }
    }
}

/// Canonical lattice point of harmonic `n`: `n·(n₁(1), n₂(1))`.
pub fn canonical_point(n: i64, mp: &ModePair) -> LatticePoint {
    let (x, y) = mp.unit_solution();
    LatticePoint::new(x * n, y * n)
}

/// Applies the translation `steps` times: `(n₁ + steps·N₂, n₂ - steps·N₁)`.
pub fn translate(p: LatticePoint, steps: i64, mp: &ModePair) -> LatticePoint {
    LatticePoint::new(p.n1 + steps * mp.n2, p.n2 - steps * mp.n1)
}

/// Contiguous range of Fourier indices `n_min ..= n_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingleModeBasis {
    n_min: i64,
    n_max: i64,
}

impl SingleModeBasis {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self, BasisError> {
        if n_min > n_max {
            return Err(BasisError::EmptyRange { min: n_min, max: n_max });
        }
        Ok(Self { n_min, n_max })
    }

    /// `-n_max ..= n_max`.
    pub fn symmetric(n_max: u32) -> Self {
        let n = i64::from(n_max);
        Self { n_min: -n, n_max: n }
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_min..=self.n_max).contains(&n)
    }

    /// Position of `n` in the ordered index list.
    pub fn position(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_min) as usize)
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }
}

/// Outcome of folding a lattice point back into an [`OrbitBasis`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wrapped {
    /// The point reached by translating `wraps · N_ℒ` steps sits at `index`.
    InBand { index: usize, wraps: i64 },
    /// The point's harmonic is not represented.
    OutOfBand,
}

/// Finite translation-orbit basis `{ T^ℓ canonical(n) : n ∈ 𝒩, ℓ ∈ ℒ }`,
/// ordered with `n` outer and `ℓ` inner.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitBasis {
    mode_pair: ModePair,
    n_set: SingleModeBasis,
    ell_min: i64,
    ell_max: i64,
    points: Vec<LatticePoint>,
}

impl OrbitBasis {
    pub fn new(
        mode_pair: ModePair,
        n_set: SingleModeBasis,
        ell_min: i64,
        ell_max: i64,
    ) -> Result<Self, BasisError> {
        if ell_min > ell_max {
            return Err(BasisError::EmptyRange { min: ell_min, max: ell_max });
        }
        let points = n_set
            .indices()
            .flat_map(|n| {
                let c = canonical_point(n, &mode_pair);
                (ell_min..=ell_max).map(move |l| (c, l))
            })
            .map(|(c, l)| translate(c, l, &mode_pair))
            .collect();
        Ok(Self { mode_pair, n_set, ell_min, ell_max, points })
    }

    /// Orbit range of `orbit_len` positions starting at `-⌊orbit_len/2⌋`.
    pub fn centered(
        mode_pair: ModePair,
        n_set: SingleModeBasis,
        orbit_len: usize,
    ) -> Result<Self, BasisError> {
        let len = orbit_len as i64;
        let ell_min = -(len / 2);
        Self::new(mode_pair, n_set, ell_min, ell_min + len - 1)
    }

    pub fn mode_pair(&self) -> &ModePair {
        &self.mode_pair
    }

    pub fn n_set(&self) -> &SingleModeBasis {
        &self.n_set
    }

    pub fn ell_range(&self) -> (i64, i64) {
        (self.ell_min, self.ell_max)
    }

    /// `N_ℒ`.
    pub fn orbit_len(&self) -> usize {
        (self.ell_max - self.ell_min + 1) as usize
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Slot of `(n, ℓ)`; both must lie in range.
    pub fn slot(&self, n: i64, ell: i64) -> Option<usize> {
        let pos = self.n_set.position(n)?;
        if !(self.ell_min..=self.ell_max).contains(&ell) {
            return None;
        }
        Some(pos * self.orbit_len() + (ell - self.ell_min) as usize)
    }

    /// `(n, ℓ)` labels of a slot.
    pub fn label(&self, index: usize) -> (i64, i64) {
        let len = self.orbit_len();
        (
            self.n_set.n_min() + (index / len) as i64,
            self.ell_min + (index % len) as i64,
        )
    }

    /// Translation count `ℓ` with `p = T^ℓ canonical(n)`.
    pub fn orbit_position(&self, p: LatticePoint) -> i64 {
        let mp = &self.mode_pair;
        let c = canonical_point(p.harmonic(mp), mp);
        let d1 = p.n1 - c.n1;
        debug_assert_eq!(d1 % mp.n2(), 0);
        d1 / mp.n2()
    }
}

/// Folds `p` into the orbit basis by whole `N_ℒ`-step translations.
pub fn wrap_to_orbit(p: LatticePoint, ob: &OrbitBasis) -> Wrapped {
    let n = p.harmonic(&ob.mode_pair);
    if !ob.n_set.contains(n) {
        return Wrapped::OutOfBand;
    }
    let len = ob.orbit_len() as i64;
    let ell = ob.orbit_position(p);
    let folded = ob.ell_min + (ell - ob.ell_min).rem_euclid(len);
    let wraps = (folded - ell) / len;
    let index = ob.slot(n, folded).expect("folded position is in range");
    Wrapped::InBand { index, wraps }
}

/// Convenience wrapper around [`OrbitBasis::new`].
pub fn build_orbit_basis(
    mp: ModePair,
    n_set: SingleModeBasis,
    ell_min: i64,
    ell_max: i64,
) -> Result<OrbitBasis, BasisError> {
    OrbitBasis::new(mp, n_set, ell_min, ell_max)
}
