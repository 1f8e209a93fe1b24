//! Two truncated bosonic modes coupled through a c-number pump by the
//! generalized three-body interaction
//! `χ_g a_e†a_g† E_p + χ_e a_e a_g E_p* + χ_g a_e†a_g E_p + χ_e a_e a_g† E_p*`.
//!
//! The interaction is not Hermitian unless `χ_g = χ_e*`. Evolution keeps
//! the raw norm and reports normalized expectations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{PumpConfig, SystemConfig};

/// Population allowed in the outermost shell, relative to the norm.
pub const TRUNCATION_TOLERANCE: f64 = 1e-3;
/// `dt · (max|rate| + Σ|coupling|·n_max)` must not exceed this.
pub const STEP_BUDGET: f64 = 0.01;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("population {fraction:.3e} of the norm reached the n_max = {n_max} shell at t = {t}")]
    TruncationBreach { t: f64, fraction: f64, n_max: usize },
    #[error("step {dt} exceeds the accuracy limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("Fock cutoff must be >= 1, got {0}")]
    InvalidCutoff(usize),
    #[error("invalid quantum parameters: {0}")]
    Invalid(String),
}

/// Product basis `|n_e, n_g⟩`, index `n_e (n_max + 1) + n_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    pub n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self, QuantumError> {
        if n_max < 1 {
            return Err(QuantumError::InvalidCutoff(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    pub fn index(&self, n_e: usize, n_g: usize) -> usize {
        n_e * (self.n_max + 1) + n_g
    }

    pub fn occupations(&self, index: usize) -> (usize, usize) {
        (index / (self.n_max + 1), index % (self.n_max + 1))
    }
}

/// Ladder-operator product `(a_e†)^p (a_e)^q (a_g†)^r (a_g)^s` restricted to
/// single raise/lower per mode, stored as sparse transitions.
#[derive(Debug, Clone, PartialEq)]
struct Ladder {
    /// `(from, to, amplitude)`
    moves: Vec<(usize, usize, f64)>,
}

impl Ladder {
    /// `de`, `dg` ∈ {−1, 0, +1}: change in each occupation.
    fn new(basis: FockBasis, de: i32, dg: i32) -> Self {
        let step = |n: usize, d: i32| -> Option<(usize, f64)> {
            match d {
                0 => Some((n, 1.0)),
                1 if n < basis.n_max => Some((n + 1, ((n + 1) as f64).sqrt())),
                -1 if n > 0 => Some((n - 1, (n as f64).sqrt())),
                _ => None,
            }
        };
        let mut moves = Vec::new();
        for from in 0..basis.dim() {
            let (ne, ng) = basis.occupations(from);
            if let (Some((me, ae)), Some((mg, ag))) = (step(ne, de), step(ng, dg)) {
                moves.push((from, basis.index(me, mg), ae * ag));
            }
        }
        Self { moves }
    }

    fn apply_add(&self, coef: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        for &(from, to, amp) in &self.moves {
            out[to] += coef * amp * psi[from];
        }
    }

    fn apply_adjoint_add(&self, coef: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        for &(from, to, amp) in &self.moves {
            out[from] += coef.conj() * amp * psi[to];
        }
    }

    fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        self.moves.iter().map(|&(from, to, amp)| psi[to].conj() * amp * psi[from]).sum()
    }

    fn dense(&self, dim: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for &(from, to, amp) in &self.moves {
            m[(to, from)] += Complex64::new(amp, 0.0);
        }
        m
    }
}

/// Dense operator on the truncated product space.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub n_max: usize,
    pub matrix: DMatrix<Complex64>,
}

impl TruncatedOperator {
    pub fn annihilation_e(n_max: usize) -> Result<Self, QuantumError> {
        let b = FockBasis::new(n_max)?;
        Ok(Self { n_max, matrix: Ladder::new(b, -1, 0).dense(b.dim()) })
    }

    pub fn annihilation_g(n_max: usize) -> Result<Self, QuantumError> {
        let b = FockBasis::new(n_max)?;
        Ok(Self { n_max, matrix: Ladder::new(b, 0, -1).dense(b.dim()) })
    }

    pub fn adjoint(&self) -> Self {
        Self { n_max: self.n_max, matrix: self.matrix.adjoint() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `‖H − H†‖_F / max(‖H‖_F, ε)`.
pub fn hermiticity_defect(op: &TruncatedOperator) -> f64 {
    let diff = TruncatedOperator { n_max: op.n_max, matrix: &op.matrix - op.matrix.adjoint() };
    diff.frobenius_norm() / op.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// `ω_e n_e + ω_g n_g` plus the four pump terms with a static pump amplitude.
pub fn build_hamiltonian(
    chi_e: Complex64,
    chi_g: Complex64,
    pump_amp: Complex64,
    omega_e: f64,
    omega_g: f64,
    n_max: usize,
) -> Result<TruncatedOperator, QuantumError> {
    let h = GeneralizedHamiltonian::new(omega_e, omega_g, chi_e, chi_g, pump_amp, 0.0, n_max)?;
    Ok(h.schrodinger_at(0.0))
}

/// One interaction term `c e^{−i r t} M`.
#[derive(Debug, Clone, PartialEq)]
struct Term {
    coef: Complex64,
    rate: f64,
    op: Ladder,
    /// Carries `E_p*` rather than `E_p`.
    conj_pump: bool,
}

/// Generalized Hamiltonian with a pump `Re(E_p e^{−iνt})`, evolved in the
/// interaction picture of `H₀ = ω_e n_e + ω_g n_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedHamiltonian {
    pub basis: FockBasis,
    pub omega_e: f64,
    pub omega_g: f64,
    pub chi_e: Complex64,
    pub chi_g: Complex64,
    pub pump: Complex64,
    pub nu: f64,
    terms: Vec<Term>,
    lower_e: Ladder,
    lower_g: Ladder,
}

impl GeneralizedHamiltonian {
    pub fn new(
        omega_e: f64,
        omega_g: f64,
        chi_e: Complex64,
        chi_g: Complex64,
        pump: Complex64,
        nu: f64,
        n_max: usize,
    ) -> Result<Self, QuantumError> {
        let basis = FockBasis::new(n_max)?;
        let finite = [omega_e, omega_g, nu, chi_e.re, chi_e.im, chi_g.re, chi_g.im, pump.re, pump.im];
        if !finite.iter().all(|v| v.is_finite()) {
            return Err(QuantumError::Invalid("all parameters must be finite".into()));
        }
        let sum = nu - (omega_e + omega_g);
        let diff = nu - (omega_e - omega_g);
        let terms = vec![
            Term { coef: chi_g * pump, rate: sum, op: Ladder::new(basis, 1, 1), conj_pump: false },
            Term { coef: chi_e * pump.conj(), rate: -sum, op: Ladder::new(basis, -1, -1), conj_pump: true },
            Term { coef: chi_g * pump, rate: diff, op: Ladder::new(basis, 1, -1), conj_pump: false },
            Term { coef: chi_e * pump.conj(), rate: -diff, op: Ladder::new(basis, -1, 1), conj_pump: true },
        ];
        Ok(Self {
            basis,
            omega_e,
            omega_g,
            chi_e,
            chi_g,
            pump,
            nu,
            terms,
            lower_e: Ladder::new(basis, -1, 0),
            lower_g: Ladder::new(basis, 0, -1),
        })
    }

    /// Quantum couplings whose coherent-state dynamics reproduce the classical
    /// envelope equations: `χ_g^q = −χ_g/(4ω_e)`, `χ_e^q = −χ_e/(4ω_g)`.
    pub fn from_classical(cfg: &SystemConfig, pump: &PumpConfig, n_max: usize) -> Result<Self, QuantumError> {
        let chi_g = Complex64::new(-cfg.chi_g / (4.0 * cfg.omega_e), 0.0);
        let chi_e = Complex64::new(-cfg.chi_e / (4.0 * cfg.omega_g), 0.0);
        Self::new(cfg.omega_e, cfg.omega_g, chi_e, chi_g, pump.complex_amplitude(), pump.nu, n_max)
    }

    /// Drops the pump process (sum or difference) farther from resonance.
    pub fn rotating_wave(&self) -> Self {
        let nearest = self.terms.iter().map(|t| t.rate.abs()).fold(f64::INFINITY, f64::min);
        let mut out = self.clone();
        out.terms.retain(|t| t.rate.abs() <= nearest);
        out
    }

    pub fn is_rotating_wave(&self) -> bool {
        self.terms.len() < 4
    }

    pub fn n_max(&self) -> usize {
        self.basis.n_max
    }

    pub fn with_cutoff(&self, n_max: usize) -> Result<Self, QuantumError> {
        let full = Self::new(self.omega_e, self.omega_g, self.chi_e, self.chi_g, self.pump, self.nu, n_max)?;
        Ok(if self.is_rotating_wave() { full.rotating_wave() } else { full })
    }

    /// Schrödinger-picture matrix with the pump phasor frozen at `E_p e^{−iνt}`.
    pub fn schrodinger_at(&self, t: f64) -> TruncatedOperator {
        let dim = self.basis.dim();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for k in 0..dim {
            let (ne, ng) = self.basis.occupations(k);
            m[(k, k)] = Complex64::new(self.omega_e * ne as f64 + self.omega_g * ng as f64, 0.0);
        }
        let phasor = Complex64::from_polar(1.0, -self.nu * t);
        for term in &self.terms {
            let p = if term.conj_pump { phasor.conj() } else { phasor };
            m += term.op.dense(dim) * (term.coef * p);
        }
        TruncatedOperator { n_max: self.basis.n_max, matrix: m }
    }

    /// Interaction-picture coupling `V_I(t)` as a dense matrix.
    pub fn interaction_at(&self, t: f64) -> TruncatedOperator {
        let dim = self.basis.dim();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for term in &self.terms {
            m += term.op.dense(dim) * (term.coef * Complex64::from_polar(1.0, -term.rate * t));
        }
        TruncatedOperator { n_max: self.basis.n_max, matrix: m }
    }

    /// Largest admissible RK4 step.
    pub fn max_step(&self) -> f64 {
        let n = self.basis.n_max as f64;
        let rate = self.terms.iter().map(|t| t.rate.abs()).fold(0.0, f64::max);
        let coupling: f64 = self.terms.iter().map(|t| t.coef.norm() * n).sum();
        STEP_BUDGET / (rate + coupling).max(f64::MIN_POSITIVE)
    }

    /// `out = V_I(t) ψ` (or `V_I(t)† ψ`).
    fn apply(&self, t: f64, psi: &[Complex64], adjoint: bool, out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        for term in &self.terms {
            let c = term.coef * Complex64::from_polar(1.0, -term.rate * t);
            if adjoint {
                term.op.apply_adjoint_add(c, psi, out);
            } else {
                term.op.apply_add(c, psi, out);
            }
        }
    }

    fn free_energy(&self, psi: &[Complex64]) -> f64 {
        psi.iter()
            .enumerate()
            .map(|(k, z)| {
                let (ne, ng) = self.basis.occupations(k);
                z.norm_sqr() * (self.omega_e * ne as f64 + self.omega_g * ng as f64)
            })
            .sum()
    }
}

/// Interaction-picture state vector. The norm is not renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub basis: FockBasis,
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn vacuum(n_max: usize) -> Result<Self, QuantumError> {
        let basis = FockBasis::new(n_max)?;
        let mut amplitudes = vec![ZERO; basis.dim()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    /// Product of coherent states truncated at `n_max`, normalized to 1.
    pub fn coherent(n_max: usize, alpha_e: Complex64, alpha_g: Complex64) -> Result<Self, QuantumError> {
        let basis = FockBasis::new(n_max)?;
        let single = |alpha: Complex64| {
            let mut c = Vec::with_capacity(n_max + 1);
            let mut v = Complex64::new(1.0, 0.0);
            for n in 0..=n_max {
                if n > 0 {
                    v *= alpha / (n as f64).sqrt();
                }
                c.push(v);
            }
            c
        };
        let (ce, cg) = (single(alpha_e), single(alpha_g));
        let mut amplitudes = vec![ZERO; basis.dim()];
        for (k, a) in amplitudes.iter_mut().enumerate() {
            let (ne, ng) = basis.occupations(k);
            *a = ce[ne] * cg[ng];
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { basis, amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Fraction of `⟨ψ|ψ⟩` with `n_e = n_max` or `n_g = n_max`.
    pub fn edge_population(&self) -> f64 {
        let n = self.basis.n_max;
        let edge: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let (ne, ng) = self.basis.occupations(*k);
                ne == n || ng == n
            })
            .map(|(_, z)| z.norm_sqr())
            .sum();
        edge / self.norm_sqr()
    }

    pub fn mean_occupation(&self) -> f64 {
        let w: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let (ne, ng) = self.basis.occupations(k);
                z.norm_sqr() * (ne + ng) as f64
            })
            .sum();
        w / self.norm_sqr()
    }
}

/// Normalized observables at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumSample {
    pub t: f64,
    /// `⟨a_e⟩` in the interaction picture (the slowly varying amplitude).
    pub a_e: Complex64,
    pub a_g: Complex64,
    /// `⟨H₀ + V(t)⟩`.
    pub energy: Complex64,
    /// `⟨ψ|ψ⟩`; multiply a normalized expectation by this for the raw value.
    pub norm: f64,
    pub occupation: f64,
}

fn observe(h: &GeneralizedHamiltonian, t: f64, state: &QuantumState, scratch: &mut [Complex64]) -> QuantumSample {
    let psi = &state.amplitudes;
    let norm = state.norm_sqr();
    h.apply(t, psi, false, scratch);
    let v: Complex64 = psi.iter().zip(scratch.iter()).map(|(a, b)| a.conj() * b).sum();
    QuantumSample {
        t,
        a_e: h.lower_e.expectation(psi) / norm,
        a_g: h.lower_g.expectation(psi) / norm,
        energy: (h.free_energy(psi) + v) / norm,
        norm,
        occupation: state.mean_occupation(),
    }
}

/// Sampled evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTrajectory {
    pub samples: Vec<QuantumSample>,
    pub final_state: QuantumState,
}

impl QuantumTrajectory {
    /// `t,re_ae,im_ae,re_ag,im_ag,re_H,im_H,norm`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re_ae,im_ae,re_ag,im_ag,re_H,im_H,norm\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.t, s.a_e.re, s.a_e.im, s.a_g.re, s.a_g.im, s.energy.re, s.energy.im, s.norm
            ));
        }
        out
    }
}

/// RK4 integration of `ψ' = −i V_I(t) ψ` from `t = 0`, sampling every
/// `stride` steps plus the final step.
pub fn evolve(
    state: &QuantumState,
    h: &GeneralizedHamiltonian,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<QuantumTrajectory, QuantumError> {
    evolve_with(state, h, t_end, dt, stride.max(1), |_, _| {})
}

fn evolve_with(
    state: &QuantumState,
    h: &GeneralizedHamiltonian,
    t_end: f64,
    dt: f64,
    stride: usize,
    mut each_step: impl FnMut(f64, &QuantumState),
) -> Result<QuantumTrajectory, QuantumError> {
    if state.basis != h.basis {
        return Err(QuantumError::Invalid("state and Hamiltonian use different cutoffs".into()));
    }
    if !(dt > 0.0 && t_end > 0.0 && dt.is_finite() && t_end.is_finite()) {
        return Err(QuantumError::Invalid("dt and t_end must be positive".into()));
    }
    let limit = h.max_step();
    if dt > limit {
        return Err(QuantumError::StepTooLarge { dt, limit });
    }
    let dim = h.basis.dim();
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut st = state.clone();
    let mut scratch = vec![ZERO; dim];
    let mut samples = vec![observe(h, 0.0, &st, &mut scratch)];
    each_step(0.0, &st);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]);
    let mut tmp = vec![ZERO; dim];
    let rhs = |t: f64, psi: &[Complex64], out: &mut [Complex64]| {
        h.apply(t, psi, false, out);
        out.iter_mut().for_each(|z| *z *= -I);
    };
    for step in 0..steps {
        let t = step as f64 * dt;
        let psi = &mut st.amplitudes;
        rhs(t, psi, &mut k1);
        for i in 0..dim {
            tmp[i] = psi[i] + 0.5 * dt * k1[i];
        }
        rhs(t + 0.5 * dt, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = psi[i] + 0.5 * dt * k2[i];
        }
        rhs(t + 0.5 * dt, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = psi[i] + dt * k3[i];
        }
        rhs(t + dt, &tmp, &mut k4);
        for i in 0..dim {
            psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (step + 1) as f64 * dt;
        if !psi.iter().all(|z| z.is_finite()) {
            return Err(QuantumError::Invalid(format!("state became non-finite at t = {t_next}")));
        }
        let fraction = st.edge_population();
        if fraction > TRUNCATION_TOLERANCE {
            return Err(QuantumError::TruncationBreach { t: t_next, fraction, n_max: h.basis.n_max });
        }
        each_step(t_next, &st);
        if (step + 1) % stride == 0 || step + 1 == steps {
            samples.push(observe(h, t_next, &st, &mut scratch));
        }
    }
    Ok(QuantumTrajectory { samples, final_state: st })
}

/// Maximum mismatch between finite-difference `d⟨a⟩/dt` and the
/// generalized Ehrenfest right-hand side
/// `−i⟨[a, V_h]⟩ + ⟨{a, V_a}⟩ − 2⟨a⟩⟨V_a⟩`, with `V_h = (V + V†)/2` and
/// `V_a = (V − V†)/2i`, relative to the largest right-hand side seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergResidual {
    pub a_e: f64,
    pub a_g: f64,
}

impl HeisenbergResidual {
    pub fn max(&self) -> f64 {
        self.a_e.max(self.a_g)
    }
}

pub fn heisenberg_residual(
    state: &QuantumState,
    h: &GeneralizedHamiltonian,
    t_end: f64,
    dt: f64,
) -> Result<HeisenbergResidual, QuantumError> {
    let dim = h.basis.dim();
    let mut ae = Vec::new();
    let mut ag = Vec::new();
    let mut rhs_e = Vec::new();
    let mut rhs_g = Vec::new();
    let mut bufs = [vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]];
    evolve_with(state, h, t_end, dt, usize::MAX, |t, st| {
        let psi = &st.amplitudes;
        let norm = st.norm_sqr();
        ae.push(h.lower_e.expectation(psi) / norm);
        ag.push(h.lower_g.expectation(psi) / norm);
        let [vpsi, vdag, apsi, tmp] = &mut bufs;
        h.apply(t, psi, false, vpsi);
        h.apply(t, psi, true, vdag);
        // ⟨V_a⟩
        let va: Complex64 =
            psi.iter().zip(vpsi.iter().zip(vdag.iter())).map(|(p, (v, d))| p.conj() * (v - d) / (2.0 * I)).sum::<Complex64>()
                / norm;
        let mut eval = |lower: &Ladder, mean: Complex64| -> Complex64 {
            // ⟨a V⟩ and ⟨a V†⟩
            tmp.iter_mut().for_each(|z| *z = ZERO);
            lower.apply_add(Complex64::new(1.0, 0.0), vpsi, tmp);
            let a_v: Complex64 = psi.iter().zip(tmp.iter()).map(|(p, x)| p.conj() * x).sum();
            tmp.iter_mut().for_each(|z| *z = ZERO);
            lower.apply_add(Complex64::new(1.0, 0.0), vdag, tmp);
            let a_vd: Complex64 = psi.iter().zip(tmp.iter()).map(|(p, x)| p.conj() * x).sum();
            // ⟨V a⟩ = ⟨V† ψ | a ψ⟩ and ⟨V† a⟩ = ⟨V ψ | a ψ⟩
            apsi.iter_mut().for_each(|z| *z = ZERO);
            lower.apply_add(Complex64::new(1.0, 0.0), psi, apsi);
            let v_a: Complex64 = vdag.iter().zip(apsi.iter()).map(|(v, x)| v.conj() * x).sum();
            let vd_a: Complex64 = vpsi.iter().zip(apsi.iter()).map(|(v, x)| v.conj() * x).sum();
            let comm_h = 0.5 * ((a_v + a_vd) - (v_a + vd_a));
            let anti_a = ((a_v - a_vd) + (v_a - vd_a)) / (2.0 * I);
            (-I * comm_h + anti_a) / norm - 2.0 * mean * va
        };
        rhs_e.push(eval(&h.lower_e, *ae.last().unwrap()));
        rhs_g.push(eval(&h.lower_g, *ag.last().unwrap()));
    })?;
    if ae.len() < 5 {
        return Err(QuantumError::Invalid("need at least four steps for the residual".into()));
    }
    let residual = |x: &[Complex64], rhs: &[Complex64]| -> f64 {
        let mut worst = 0.0f64;
        for i in 2..x.len() - 2 {
            let fd = (8.0 * (x[i + 1] - x[i - 1]) - (x[i + 2] - x[i - 2])) / (12.0 * dt);
            worst = worst.max((fd - rhs[i]).norm());
        }
        let scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    };
    Ok(HeisenbergResidual { a_e: residual(&ae, &rhs_e), a_g: residual(&ag, &rhs_g) })
}

/// JSON parameters for a quantum run. Frequencies in rad/s; complex values
/// as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumConfig {
    pub omega_e: f64,
    pub omega_g: f64,
    pub chi_e: Complex64,
    pub chi_g: Complex64,
    pub pump: Complex64,
    pub nu: f64,
    pub alpha_e: Complex64,
    pub alpha_g: Complex64,
    pub t_end: f64,
    pub dt: f64,
    /// Keep only the pump process nearest resonance.
    #[serde(default)]
    pub rotating_wave: bool,
}

impl QuantumConfig {
    pub fn hamiltonian(&self, n_max: usize) -> Result<GeneralizedHamiltonian, QuantumError> {
        let h = GeneralizedHamiltonian::new(self.omega_e, self.omega_g, self.chi_e, self.chi_g, self.pump, self.nu, n_max)?;
        Ok(if self.rotating_wave { h.rotating_wave() } else { h })
    }

    pub fn initial_state(&self, n_max: usize) -> Result<QuantumState, QuantumError> {
        QuantumState::coherent(n_max, self.alpha_e, self.alpha_g)
    }
}
