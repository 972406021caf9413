//! Brute-force photon-number-basis oracle.
//!
//! States are built in a truncated Fock basis with cutoff `N` (levels
//! `0..=N` per mode) and every probability is recomputed by explicit
//! summation against number-basis coherent-state amplitudes. The oracle
//! itself never calls into [`crate::core_model`]; the two layers are compared
//! in [`suite`], which backs the `oracle-check` command.
//!
//! Three representations are used:
//!
//! * `Paired`: coefficients `c[n][n']` of `|n,n><n',n'|` on two modes. Both
//!   `rho_1` (optical mode 1 with the magnon) and the emitted photon pair have
//!   this form.
//! * `TwoMode`: a dense matrix over `|n1,n2>` with row index `n1*(N+1)+n2`,
//!   produced by the loss channel and by reducing three-mode states.
//! * `ThreeModePure`: a state vector over `|A1, A2, m>` with index
//!   `(a1*(N+1)+a2)*(N+1)+m`, the target of the pulse propagators.
//!
//! The propagator route makes one structural fact explicit: after
//! `U2 U1 |000>` the magnon keeps the excitations that were not converted.
//! The full partial trace over the magnon therefore has unit trace, while the
//! block with the magnon left in vacuum carries weight `(1-p)/(1-pT)` and is
//! exactly the pair state used by the closed forms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{check_domain, Error, Result};

pub mod suite;

/// Tail tolerance used both for cutoff selection and for oracle evaluations.
pub const TAIL_TOL: f64 = 1e-12;

/// Smallest cutoff ever selected automatically.
pub const MIN_CUTOFF: usize = 20;

/// Levels next to the cutoff excluded when comparing propagated states.
pub const GUARD_BAND: usize = 10;

/// Next-term norm at which a truncated exponential series is stopped.
pub const SERIES_TOL: f64 = 1e-14;

const MAX_CUTOFF: usize = 4000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which of the two modes of a two-mode state is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    First,
    Second,
}

/// Physical modes carried by a paired state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairModes {
    /// Optical mode 1 entangled with the magnon; optical mode 2 in vacuum.
    OpticalMagnon,
    /// The two emitted optical pulses.
    OpticalPair,
}

#[derive(Debug, Clone)]
enum Repr {
    Paired {
        modes: PairModes,
        coeffs: DMatrix<Complex64>,
    },
    TwoMode(DMatrix<Complex64>),
    ThreeModePure(DVector<Complex64>),
}

/// A truncated photon-number representation of one of the protocol states.
#[derive(Debug, Clone)]
pub struct TruncatedState {
    cutoff: usize,
    repr: Repr,
    /// Upper bound on the population discarded by the truncation.
    tail_bound: f64,
}

impl TruncatedState {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Set when the cutoff discards more population than [`TAIL_TOL`].
    pub fn tail_warning(&self) -> bool {
        self.tail_bound > TAIL_TOL
    }

    pub fn is_paired(&self) -> bool {
        matches!(self.repr, Repr::Paired { .. })
    }

    pub fn pair_modes(&self) -> Option<PairModes> {
        match &self.repr {
            Repr::Paired { modes, .. } => Some(*modes),
            _ => None,
        }
    }

    /// `c[n][n']` of a paired state.
    pub fn paired_coefficients(&self) -> Option<&DMatrix<Complex64>> {
        match &self.repr {
            Repr::Paired { coeffs, .. } => Some(coeffs),
            _ => None,
        }
    }

    /// Amplitude `<a1, a2, m|psi>` of a three-mode pure state.
    pub fn amplitude(&self, a1: usize, a2: usize, m: usize) -> Option<Complex64> {
        match &self.repr {
            Repr::ThreeModePure(psi) => Some(psi[self.index3(a1, a2, m)]),
            _ => None,
        }
    }

    /// `<ket|rho|bra>` of a three-mode pure state, occupations ordered `(A1, A2, m)`.
    pub fn density3(&self, ket: [usize; 3], bra: [usize; 3]) -> Option<Complex64> {
        let a = self.amplitude(ket[0], ket[1], ket[2])?;
        let b = self.amplitude(bra[0], bra[1], bra[2])?;
        Some(a * b.conj())
    }

    fn index3(&self, a1: usize, a2: usize, m: usize) -> usize {
        let d = self.dim();
        (a1 * d + a2) * d + m
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Paired { coeffs, .. } => coeffs.diagonal().iter().map(|z| z.re).sum(),
            Repr::TwoMode(rho) => rho.diagonal().iter().map(|z| z.re).sum(),
            Repr::ThreeModePure(psi) => psi.norm_squared(),
        }
    }

    /// Density matrix over the two modes of a paired or two-mode state.
    pub fn two_mode_matrix(&self) -> Result<DMatrix<Complex64>> {
        match &self.repr {
            Repr::Paired { coeffs, .. } => {
                let d = self.dim();
                let mut rho = DMatrix::zeros(d * d, d * d);
                for n in 0..d {
                    for k in 0..d {
                        rho[(n * d + n, k * d + k)] = coeffs[(n, k)];
                    }
                }
                Ok(rho)
            }
            Repr::TwoMode(rho) => Ok(rho.clone()),
            Repr::ThreeModePure(_) => Err(Error::Unsupported(
                "three-mode state: reduce with optical_state() or magnon_vacuum_block() first",
            )),
        }
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.repr {
            Repr::Paired { coeffs, .. } => hermiticity_defect(coeffs),
            Repr::TwoMode(rho) => hermiticity_defect(rho),
            Repr::ThreeModePure(_) => 0.0,
        }
    }

    /// Smallest eigenvalue of the density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            Repr::Paired { coeffs, .. } => min_eigenvalue(coeffs),
            Repr::TwoMode(rho) => min_eigenvalue(rho),
            Repr::ThreeModePure(_) => 0.0,
        }
    }

    /// Full partial trace over the magnon of a three-mode pure state.
    pub fn optical_state(&self) -> Result<TruncatedState> {
        self.reduce_magnon(false)
    }

    /// Optical block with the magnon projected onto its vacuum (unnormalised).
    pub fn magnon_vacuum_block(&self) -> Result<TruncatedState> {
        self.reduce_magnon(true)
    }

    fn reduce_magnon(&self, vacuum_only: bool) -> Result<TruncatedState> {
        let Repr::ThreeModePure(psi) = &self.repr else {
            return Err(Error::Unsupported("magnon reduction needs a three-mode state"));
        };
        let d = self.dim();
        let magnon_levels = if vacuum_only { 1 } else { d };
        let mut rho = DMatrix::zeros(d * d, d * d);
        for m in 0..magnon_levels {
            // nonzero optical amplitudes for this magnon occupation
            let column: Vec<(usize, Complex64)> = (0..d * d)
                .map(|i| (i, psi[i * d + m]))
                .filter(|(_, z)| *z != ZERO)
                .collect();
            for &(i, zi) in &column {
                for &(j, zj) in &column {
                    rho[(i, j)] += zi * zj.conj();
                }
            }
        }
        Ok(TruncatedState {
            cutoff: self.cutoff,
            repr: Repr::TwoMode(rho),
            tail_bound: self.tail_bound,
        })
    }
}

/// The three-mode vacuum `|0, 0, 0>`.
pub fn vacuum3(cutoff: usize) -> Result<TruncatedState> {
    check_cutoff(cutoff)?;
    let d = cutoff + 1;
    let mut psi = DVector::zeros(d * d * d);
    psi[0] = Complex64::new(1.0, 0.0);
    Ok(TruncatedState {
        cutoff,
        repr: Repr::ThreeModePure(psi),
        tail_bound: 0.0,
    })
}

/// Two-mode vacuum `|0,0><0,0|` in paired form.
pub fn vacuum_pair(cutoff: usize) -> Result<TruncatedState> {
    build_rho_pair(0.0, 1.0, cutoff)
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    check_domain(
        "cutoff",
        cutoff as f64,
        (1..=MAX_CUTOFF).contains(&cutoff),
        "1 <= N <= 4000",
    )
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Geometric tail `x^{N+1}/(1-x)` of a thermal-like ladder with ratio `x`.
pub fn geometric_tail(ratio: f64, cutoff: usize) -> f64 {
    if ratio <= 0.0 {
        0.0
    } else {
        ratio.powi(cutoff as i32 + 1) / (1.0 - ratio)
    }
}

/// Bound `|alpha|^{2(N+1)}/(N+1)!` on the coherent-state population above `N`.
pub fn coherent_tail(alpha_abs: f64, cutoff: usize) -> f64 {
    if alpha_abs == 0.0 {
        return 0.0;
    }
    let k = cutoff + 1;
    (2.0 * k as f64 * alpha_abs.ln() - ln_factorial(k)).exp()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Smallest cutoff at which the pair tail (ratio `pt`) plus the tails of every
/// displacement amplitude in `amplitudes` stays below [`TAIL_TOL`]; the same
/// budget is enforced when the oracle evaluates an overlap.
pub fn select_cutoff(pt: f64, amplitudes: &[f64]) -> Result<usize> {
    check_domain("pT", pt, (0.0..1.0).contains(&pt), "0 <= pT < 1")?;
    let total = |n: usize| geometric_tail(pt, n) + amplitudes.iter().map(|a| coherent_tail(a.abs(), n)).sum::<f64>();
    let mut n = MIN_CUTOFF;
    while total(n) >= TAIL_TOL {
        n += 1;
        if n > MAX_CUTOFF {
            return Err(Error::Truncation {
                tail: total(MAX_CUTOFF),
                tol: TAIL_TOL,
                suggested: MAX_CUTOFF,
            });
        }
    }
    Ok(n)
}

/// `rho_1` on optical mode 1 and the magnon:
/// `c[n][n'] = (1-p) (-1)^n (i sqrt p)^{n+n'}`.
pub fn build_rho1(p: f64, cutoff: usize) -> Result<TruncatedState> {
    check_domain("p", p, (0.0..1.0).contains(&p), "0 <= p < 1")?;
    check_cutoff(cutoff)?;
    let d = cutoff + 1;
    let root = Complex64::new(0.0, p.sqrt());
    let powers = powers(root, 2 * cutoff);
    let coeffs = DMatrix::from_fn(d, d, |n, k| {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        powers[n + k] * ((1.0 - p) * sign)
    });
    Ok(TruncatedState {
        cutoff,
        repr: Repr::Paired {
            modes: PairModes::OpticalMagnon,
            coeffs,
        },
        tail_bound: (1.0 - p) * geometric_tail(p, cutoff),
    })
}

/// The emitted photon pair: `c[n][n'] = (1-p) (-sqrt(pT))^{n+n'}`.
pub fn build_rho_pair(p: f64, t: f64, cutoff: usize) -> Result<TruncatedState> {
    check_domain("p", p, (0.0..1.0).contains(&p), "0 <= p < 1")?;
    check_domain("T", t, (0.0..=1.0).contains(&t), "0 <= T <= 1")?;
    check_cutoff(cutoff)?;
    let d = cutoff + 1;
    let powers = powers(Complex64::new(-(p * t).sqrt(), 0.0), 2 * cutoff);
    let coeffs = DMatrix::from_fn(d, d, |n, k| powers[n + k] * (1.0 - p));
    Ok(TruncatedState {
        cutoff,
        repr: Repr::Paired {
            modes: PairModes::OpticalPair,
            coeffs,
        },
        tail_bound: (1.0 - p) * geometric_tail(p * t, cutoff),
    })
}

/// Exact trace `(1-p)(1-(pT)^{N+1})/(1-pT)` of [`build_rho_pair`].
pub fn expected_pair_trace(p: f64, t: f64, cutoff: usize) -> f64 {
    let x = p * t;
    (1.0 - p) * (1.0 - x.powi(cutoff as i32 + 1)) / (1.0 - x)
}

fn powers(base: Complex64, max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=max {
        out.push(acc);
        acc *= base;
    }
    out
}

/// Number-basis amplitudes `<n|alpha> = e^{-|alpha|^2/2} alpha^n / sqrt(n!)`
/// for `n = 0..=N`, by cumulative products.
pub fn coherent_amplitudes(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut amp = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    out.push(amp);
    for n in 1..=cutoff {
        amp *= alpha / (n as f64).sqrt();
        out.push(amp);
    }
    out
}

fn check_tails(state: &TruncatedState, amplitudes: &[f64]) -> Result<()> {
    let tail = state.tail_bound
        + amplitudes
            .iter()
            .map(|a| coherent_tail(a.abs(), state.cutoff))
            .sum::<f64>();
    if tail > TAIL_TOL {
        let mut suggested = state.cutoff + 1;
        while state.tail_bound + amplitudes.iter().map(|a| coherent_tail(a.abs(), suggested)).sum::<f64>() > TAIL_TOL
            && suggested < MAX_CUTOFF
        {
            suggested += 1;
        }
        return Err(Error::Truncation {
            tail,
            tol: TAIL_TOL,
            suggested,
        });
    }
    Ok(())
}

/// `<alpha, beta| rho |alpha, beta>` by direct summation.
pub fn oracle_joint_prob(state: &TruncatedState, alpha: Complex64, beta: Complex64) -> Result<f64> {
    check_tails(state, &[alpha.norm(), beta.norm()])?;
    Ok(joint_sum(state, alpha, beta)?)
}

fn joint_sum(state: &TruncatedState, alpha: Complex64, beta: Complex64) -> Result<f64> {
    let n = state.cutoff;
    let a = coherent_amplitudes(alpha, n);
    let b = coherent_amplitudes(beta, n);
    match &state.repr {
        Repr::Paired { coeffs, .. } => {
            let d = n + 1;
            let mut total = ZERO;
            for i in 0..d {
                let left = (a[i] * b[i]).conj();
                if left == ZERO {
                    continue;
                }
                for j in 0..d {
                    total += left * coeffs[(i, j)] * a[j] * b[j];
                }
            }
            Ok(total.re)
        }
        Repr::TwoMode(rho) => {
            let d = n + 1;
            let v: Vec<Complex64> = (0..d * d).map(|i| a[i / d] * b[i % d]).collect();
            let mut total = ZERO;
            for i in 0..d * d {
                if v[i] == ZERO {
                    continue;
                }
                let vi = v[i].conj();
                for j in 0..d * d {
                    total += vi * rho[(i, j)] * v[j];
                }
            }
            Ok(total.re)
        }
        Repr::ThreeModePure(_) => Err(Error::Unsupported(
            "three-mode state: reduce with optical_state() or magnon_vacuum_block() first",
        )),
    }
}

/// `<alpha| Tr_other(rho) |alpha>` for the chosen arm.
pub fn oracle_marginal_prob(state: &TruncatedState, alpha: Complex64, arm: Arm) -> Result<f64> {
    check_tails(state, &[alpha.norm()])?;
    let reduced = reduced_state(state, arm)?;
    let a = coherent_amplitudes(alpha, state.cutoff);
    let d = state.dim();
    let mut total = ZERO;
    for i in 0..d {
        for j in 0..d {
            total += a[i].conj() * reduced[(i, j)] * a[j];
        }
    }
    Ok(total.re)
}

/// Single-mode reduced density matrix of one arm.
pub fn reduced_state(state: &TruncatedState, arm: Arm) -> Result<DMatrix<Complex64>> {
    let d = state.dim();
    match &state.repr {
        // Tr_B |n,n><n',n'| = delta_{n n'} |n><n|
        Repr::Paired { coeffs, .. } => Ok(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                coeffs[(i, i)]
            } else {
                ZERO
            }
        })),
        Repr::TwoMode(rho) => {
            let mut out = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    let mut acc = ZERO;
                    for k in 0..d {
                        acc += match arm {
                            Arm::First => rho[(i * d + k, j * d + k)],
                            Arm::Second => rho[(k * d + i, k * d + j)],
                        };
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
        Repr::ThreeModePure(_) => Err(Error::Unsupported(
            "three-mode state: reduce with optical_state() or magnon_vacuum_block() first",
        )),
    }
}

/// `Q(alpha, beta) = <alpha,beta|rho|alpha,beta> / pi^2`.
pub fn oracle_q2(state: &TruncatedState, alpha: Complex64, beta: Complex64) -> Result<f64> {
    Ok(oracle_joint_prob(state, alpha, beta)? / (PI * PI))
}

/// `Q(alpha) = <alpha|rho_arm|alpha> / pi`.
pub fn oracle_q1(state: &TruncatedState, alpha: Complex64, arm: Arm) -> Result<f64> {
    Ok(oracle_marginal_prob(state, alpha, arm)? / PI)
}

/// Two-mode function seen by displaced on-off detectors of efficiency `eta`,
/// normalised like the closed-form `Q_eta`.
///
/// An inefficient detector behind the displacement `D(-alpha)` never clicks
/// with probability `<:exp(-eta (a^dag - alpha*)(a - alpha)):>`, which equals
/// the ideal no-click probability of the loss-channel output displaced by
/// `sqrt(eta) alpha`. The closed form is normalised so that
/// `pi^2/eta^2 Q_eta` is that probability, hence
/// `Q_eta(alpha, beta) = eta^2 Q_lossy(sqrt(eta) alpha, sqrt(eta) beta)`.
/// `lossy` must already be the output of [`apply_loss`] with the same `eta`.
pub fn detected_q2(lossy: &TruncatedState, eta: f64, alpha: Complex64, beta: Complex64) -> Result<f64> {
    let s = eta.sqrt();
    Ok(eta * eta * oracle_q2(lossy, alpha * s, beta * s)?)
}

/// Single-mode counterpart of [`detected_q2`]: `eta Q_lossy(sqrt(eta) alpha)`.
pub fn detected_q1(lossy: &TruncatedState, eta: f64, alpha: Complex64, arm: Arm) -> Result<f64> {
    Ok(eta * oracle_q1(lossy, alpha * eta.sqrt(), arm)?)
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    A1,
    A2,
    Magnon,
}

#[derive(Debug, Clone, Copy)]
enum Ladder {
    Raise(Mode),
    Lower(Mode),
}

fn occupations(index: usize, d: usize) -> [usize; 3] {
    [index / (d * d), (index / d) % d, index % d]
}

fn mode_slot(mode: Mode) -> usize {
    match mode {
        Mode::A1 => 0,
        Mode::A2 => 1,
        Mode::Magnon => 2,
    }
}

/// Applies the product `first * second` of ladder operators (rightmost acts
/// first) to a three-mode vector; components pushed beyond the cutoff are
/// dropped.
fn apply_pair(psi: &DVector<Complex64>, d: usize, ops: [Ladder; 2]) -> DVector<Complex64> {
    let mut out = DVector::zeros(psi.len());
    for (idx, z) in psi.iter().enumerate() {
        if *z == ZERO {
            continue;
        }
        let mut occ = occupations(idx, d);
        let mut amp = *z;
        let mut alive = true;
        for op in ops.iter().rev() {
            match *op {
                Ladder::Raise(mode) => {
                    let slot = mode_slot(mode);
                    if occ[slot] + 1 >= d {
                        alive = false;
                        break;
                    }
                    occ[slot] += 1;
                    amp *= (occ[slot] as f64).sqrt();
                }
                Ladder::Lower(mode) => {
                    let slot = mode_slot(mode);
                    if occ[slot] == 0 {
                        alive = false;
                        break;
                    }
                    amp *= (occ[slot] as f64).sqrt();
                    occ[slot] -= 1;
                }
            }
        }
        if alive {
            out[(occ[0] * d + occ[1]) * d + occ[2]] += amp;
        }
    }
    out
}

/// `exp(coeff * op) psi` by a truncated Taylor series. Returns the result and
/// the number of terms used.
fn exp_series(
    psi: &DVector<Complex64>,
    d: usize,
    coeff: Complex64,
    ops: [Ladder; 2],
) -> Result<(DVector<Complex64>, usize)> {
    let mut sum = psi.clone();
    let mut term = psi.clone();
    // a bilinear ladder product changes the total occupation by at most two,
    // so after 3d+1 applications a truncated vector is either zero or diverging
    let max_terms = 3 * d + 1;
    for k in 1..=max_terms {
        term = apply_pair(&term, d, ops) * (coeff / k as f64);
        let norm = term.norm();
        if !norm.is_finite() {
            return Err(Error::Unstable {
                time: k as f64,
                reason: "propagator series diverged".into(),
            });
        }
        sum += &term;
        if norm < SERIES_TOL {
            return Ok((sum, k));
        }
    }
    Err(Error::Truncation {
        tail: term.norm(),
        tol: SERIES_TOL,
        suggested: d + GUARD_BAND,
    })
}

fn apply_diagonal<F: Fn([usize; 3]) -> f64>(psi: &mut DVector<Complex64>, d: usize, weight: F) {
    for (idx, z) in psi.iter_mut().enumerate() {
        if *z != ZERO {
            *z *= weight(occupations(idx, d));
        }
    }
}

/// First-pulse propagator applied to `|000>`:
/// `exp(-i sqrt(p) A1^dag m^dag) exp(-G1 tau1 (1 + A1^dag A1 + m^dag m)) exp(i sqrt(p) A1 m)`.
pub fn apply_u1_vacuum(p: f64, cutoff: usize) -> Result<TruncatedState> {
    check_domain("p", p, (0.0..1.0).contains(&p), "0 <= p < 1")?;
    let vacuum = vacuum3(cutoff)?;
    let Repr::ThreeModePure(mut psi) = vacuum.repr else {
        unreachable!()
    };
    let d = cutoff + 1;
    let root = p.sqrt();
    let g1tau = -(-p).ln_1p() / 2.0;

    (psi, _) = exp_series(
        &psi,
        d,
        Complex64::new(0.0, root),
        [Ladder::Lower(Mode::A1), Ladder::Lower(Mode::Magnon)],
    )?;
    apply_diagonal(&mut psi, d, |[a1, _, m]| {
        (-g1tau * (1.0 + a1 as f64 + m as f64)).exp()
    });
    (psi, _) = exp_series(
        &psi,
        d,
        Complex64::new(0.0, -root),
        [Ladder::Raise(Mode::A1), Ladder::Raise(Mode::Magnon)],
    )?;

    Ok(TruncatedState {
        cutoff,
        repr: Repr::ThreeModePure(psi),
        tail_bound: (1.0 - p) * geometric_tail(p, cutoff),
    })
}

/// Second-pulse propagator
/// `exp(-i sqrt(T') A2^dag m) exp(G2 tau2 (A2^dag A2 - m^dag m)) exp(i sqrt(T') A2 m^dag)`
/// with `T' = e^{2 G2 tau2} - 1`, applied to a three-mode pure state.
pub fn apply_u2(state: &TruncatedState, g2tau: f64) -> Result<TruncatedState> {
    check_domain("g2tau", g2tau, g2tau >= 0.0, "finite and >= 0")?;
    let Repr::ThreeModePure(psi) = &state.repr else {
        return Err(Error::Unsupported("the second-pulse propagator acts on three-mode states"));
    };
    let d = state.dim();
    let root = (2.0 * g2tau).exp_m1().sqrt();

    let (mut psi, _) = exp_series(
        psi,
        d,
        Complex64::new(0.0, root),
        [Ladder::Lower(Mode::A2), Ladder::Raise(Mode::Magnon)],
    )?;
    apply_diagonal(&mut psi, d, |[_, a2, m]| (g2tau * (a2 as f64 - m as f64)).exp());
    let (psi, _) = exp_series(
        &psi,
        d,
        Complex64::new(0.0, -root),
        [Ladder::Raise(Mode::A2), Ladder::Lower(Mode::Magnon)],
    )?;

    Ok(TruncatedState {
        cutoff: state.cutoff,
        repr: Repr::ThreeModePure(psi),
        tail_bound: state.tail_bound,
    })
}

/// Pure-loss channel of transmissivity `eta` on both arms of a two-mode state.
///
/// Kraus form per mode:
/// `|n><n'| -> sum_j sqrt(C(n,j) C(n',j)) eta^{(n+n'-2j)/2} (1-eta)^j |n-j><n'-j|`.
pub fn apply_loss(state: &TruncatedState, eta: f64) -> Result<TruncatedState> {
    check_domain("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1")?;
    let rho = state.two_mode_matrix()?;
    if eta == 1.0 {
        return Ok(TruncatedState {
            cutoff: state.cutoff,
            repr: Repr::TwoMode(rho),
            tail_bound: state.tail_bound,
        });
    }
    let d = state.dim();
    let kraus = LossKraus::new(eta, state.cutoff);
    let rho = lose_one_mode(&rho, d, &kraus, Arm::First);
    let rho = lose_one_mode(&rho, d, &kraus, Arm::Second);
    Ok(TruncatedState {
        cutoff: state.cutoff,
        repr: Repr::TwoMode(rho),
        tail_bound: state.tail_bound,
    })
}

/// Loss channel on a single-mode density matrix.
pub fn apply_loss_single(rho: &DMatrix<Complex64>, eta: f64) -> Result<DMatrix<Complex64>> {
    check_domain("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1")?;
    let d = rho.nrows();
    let kraus = LossKraus::new(eta, d - 1);
    let mut out = DMatrix::zeros(d, d);
    for n in 0..d {
        for k in 0..d {
            for j in 0..=n.min(k) {
                out[(n - j, k - j)] += rho[(n, k)] * kraus.get(n, j) * kraus.get(k, j);
            }
        }
    }
    Ok(out)
}

/// `K[n][j] = sqrt(C(n,j)) eta^{(n-j)/2} (1-eta)^{j/2}`.
struct LossKraus {
    table: Vec<Vec<f64>>,
}

impl LossKraus {
    fn new(eta: f64, cutoff: usize) -> Self {
        let ln_fact: Vec<f64> = std::iter::once(0.0)
            .chain((1..=cutoff).scan(0.0, |acc, k| {
                *acc += (k as f64).ln();
                Some(*acc)
            }))
            .collect();
        let keep = eta.sqrt();
        let lose = (1.0 - eta).sqrt();
        let table = (0..=cutoff)
            .map(|n| {
                (0..=n)
                    .map(|j| {
                        let binom = (0.5 * (ln_fact[n] - ln_fact[j] - ln_fact[n - j])).exp();
                        binom * keep.powi((n - j) as i32) * lose.powi(j as i32)
                    })
                    .collect()
            })
            .collect();
        Self { table }
    }

    #[inline]
    fn get(&self, n: usize, j: usize) -> f64 {
        self.table[n][j]
    }
}

fn lose_one_mode(rho: &DMatrix<Complex64>, d: usize, kraus: &LossKraus, arm: Arm) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(d * d, d * d);
    let split = |i: usize| -> (usize, usize) {
        match arm {
            Arm::First => (i / d, i % d),
            Arm::Second => (i % d, i / d),
        }
    };
    let join = |lost: usize, other: usize| -> usize {
        match arm {
            Arm::First => lost * d + other,
            Arm::Second => other * d + lost,
        }
    };
    for i in 0..d * d {
        let (n, other_i) = split(i);
        for k in 0..d * d {
            let z = rho[(i, k)];
            if z == ZERO {
                continue;
            }
            let (n2, other_k) = split(k);
            for j in 0..=n.min(n2) {
                out[(join(n - j, other_i), join(n2 - j, other_k))] +=
                    z * (kraus.get(n, j) * kraus.get(n2, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rho1_examples() {
        let vac = build_rho1(0.0, 4).unwrap();
        let coeffs = vac.paired_coefficients().unwrap();
        for n in 0..5 {
            for k in 0..5 {
                let expected = if n == 0 && k == 0 { 1.0 } else { 0.0 };
                assert_eq!(coeffs[(n, k)], c(expected, 0.0));
            }
        }
        let p = 0.3935;
        let rho = build_rho1(p, 40).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-8);
        let coeffs = rho.paired_coefficients().unwrap();
        for n in 0..=40 {
            assert_relative_eq!(coeffs[(n, n)].re, (1.0 - p) * p.powi(n as i32), max_relative = 1e-12);
            assert!(coeffs[(n, n)].im.abs() < 1e-15);
        }
    }

    #[test]
    fn rho_pair_examples() {
        let rho = build_rho_pair(0.4, 0.0, 10).unwrap();
        assert_relative_eq!(rho.trace(), 0.6, epsilon = 1e-15);
        assert_eq!(rho.paired_coefficients().unwrap()[(1, 0)], ZERO);

        let rho = build_rho_pair(0.3935, 1.0, 40).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-8);

        let (p, t) = (0.3935, 0.95);
        let rho = build_rho_pair(p, t, 40).unwrap();
        let closed = (1.0 - p) / (1.0 - p * t);
        assert!((rho.trace() - closed).abs() < 1e-8);
        assert!((closed - 0.96858).abs() < 1e-5);
        assert_relative_eq!(rho.trace(), expected_pair_trace(p, t, 40), epsilon = 1e-14);
    }

    #[test]
    fn small_cutoff_sets_tail_warning() {
        assert!(build_rho1(0.8, 5).unwrap().tail_warning());
        assert!(!build_rho1(0.3, 60).unwrap().tail_warning());
    }

    #[test]
    fn coherent_amplitude_examples() {
        let vac = coherent_amplitudes(ZERO, 6);
        assert_eq!(vac[0], c(1.0, 0.0));
        assert!(vac[1..].iter().all(|z| *z == ZERO));

        let one = coherent_amplitudes(c(1.0, 0.0), 30);
        let norm: f64 = one.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);

        let two_i = coherent_amplitudes(c(0.0, 2.0), 30);
        assert_relative_eq!(two_i[0].norm_sqr(), (-4.0f64).exp(), epsilon = 1e-16);
        assert!(coherent_tail(1.0, 30) < 1e-30);
    }

    #[test]
    fn joint_and_marginal_at_origin() {
        let vac = vacuum_pair(20).unwrap();
        assert_relative_eq!(oracle_joint_prob(&vac, ZERO, ZERO).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(oracle_marginal_prob(&vac, ZERO, Arm::First).unwrap(), 1.0, epsilon = 1e-15);

        let rho = build_rho_pair(0.3935, 1.0, 40).unwrap();
        assert!((oracle_joint_prob(&rho, ZERO, ZERO).unwrap() - 0.6065).abs() < 1e-9);
        let marg = oracle_marginal_prob(&rho, c(1.0, 0.0), Arm::Second).unwrap();
        let expected = 0.6065 * (-0.6065f64).exp();
        assert!((marg - expected).abs() < 1e-9);
    }

    #[test]
    fn truncation_errors_suggest_cutoff() {
        let rho = build_rho_pair(0.3, 1.0, 20).unwrap();
        match oracle_joint_prob(&rho, c(4.0, 0.0), ZERO) {
            Err(Error::Truncation { suggested, .. }) => {
                assert!(suggested > 20);
                let wider = build_rho_pair(0.3, 1.0, suggested).unwrap();
                assert!(oracle_joint_prob(&wider, c(4.0, 0.0), ZERO).is_ok());
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn cutoff_selection() {
        assert_eq!(select_cutoff(0.0, &[0.0]).unwrap(), MIN_CUTOFF);
        let n = select_cutoff(0.8, &[2.0]).unwrap();
        let total = |n| geometric_tail(0.8, n) + coherent_tail(2.0, n);
        assert!(total(n) < TAIL_TOL && total(n - 1) >= TAIL_TOL);
        assert!(select_cutoff(1.0, &[]).is_err());
    }

    #[test]
    fn propagators_on_vacuum() {
        let state = apply_u1_vacuum(0.0, 8).unwrap();
        assert_eq!(state.amplitude(0, 0, 0), Some(c(1.0, 0.0)));
        assert_relative_eq!(state.trace(), 1.0, epsilon = 1e-15);
        let same = apply_u2(&state, 0.0).unwrap();
        assert_eq!(same.amplitude(0, 0, 0), Some(c(1.0, 0.0)));
    }

    #[test]
    fn u2_identity_at_zero_area() {
        let state = apply_u1_vacuum(0.3, 15).unwrap();
        let after = apply_u2(&state, 0.0).unwrap();
        for n in 0..=15 {
            assert_eq!(after.amplitude(n, 0, n), state.amplitude(n, 0, n));
        }
    }

    #[test]
    fn single_photon_loss() {
        let mut rho = DMatrix::zeros(3, 3);
        rho[(1, 1)] = c(1.0, 0.0);
        let out = apply_loss_single(&rho, 0.7).unwrap();
        assert_relative_eq!(out[(1, 1)].re, 0.7, epsilon = 1e-15);
        assert_relative_eq!(out[(0, 0)].re, 0.3, epsilon = 1e-15);
        assert_eq!(out[(2, 2)], ZERO);

        let pair = build_rho_pair(0.3, 1.0, 12).unwrap();
        let same = apply_loss(&pair, 1.0).unwrap();
        assert_eq!(same.two_mode_matrix().unwrap(), pair.two_mode_matrix().unwrap());
    }

    #[test]
    fn three_mode_states_need_reduction() {
        let state = apply_u1_vacuum(0.2, 24).unwrap();
        assert!(matches!(oracle_joint_prob(&state, ZERO, ZERO), Err(Error::Unsupported(_))));
        assert!(state.optical_state().unwrap().two_mode_matrix().is_ok());
    }
}
