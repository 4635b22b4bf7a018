//! Truncated Fock-space oracle.
//!
//! Rebuilds the detector coherence from explicit operators (displacement
//! matrices, the forced-oscillator propagator and per-mode overlap traces)
//! and compares the witness extracted from it with the closed forms. Runs at
//! small mode numbers only; the closed forms are uniform in the parameters.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::CavityConfig;
use crate::response::{self, ChiMethod, CouplingSpec, QuadratureOptions};
use crate::trajectory::TrajectorySpec;
use crate::witness::{extract_witness, StateFamily, StateSpec};

pub type CMatrix = DMatrix<Complex64>;

/// Maximum tolerated compressed unitarity defect of a displacement matrix.
pub const UNITARITY_TOL: f64 = 1e-8;

/// Maximum tolerated state weight in the top quarter of the basis.
pub const LEAK_TOL: f64 = 1e-12;

/// One oscillator mode in a basis of `cutoff` number states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMode {
    pub cutoff: usize,
    pub omega: f64,
    /// Number of low basis states whose images must be faithful; screening
    /// checks that they do not leak into the top quarter of the basis.
    pub support: usize,
    /// Largest admissible state weight in the top quarter of the basis.
    pub leak_tol: f64,
}

impl TruncatedMode {
    pub fn new(cutoff: usize, omega: f64) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::invalid("cutoff", "basis needs at least 2 states"));
        }
        if !omega.is_finite() {
            return Err(Error::invalid("omega", "frequency must be finite"));
        }
        Ok(Self {
            cutoff,
            omega,
            support: (cutoff / 4).max(1),
            leak_tol: LEAK_TOL,
        })
    }

    pub fn with_support(mut self, support: usize) -> Self {
        self.support = support.clamp(1, self.cutoff);
        self
    }

    fn top_start(&self) -> usize {
        self.cutoff - (self.cutoff / 4).max(1)
    }

    pub fn annihilation(&self) -> CMatrix {
        let n = self.cutoff;
        DMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `exp(−iθ n̂)` as a diagonal.
    fn number_phase(&self, theta: f64) -> DVector<Complex64> {
        DVector::from_fn(self.cutoff, |n, _| {
            Complex64::from_polar(1.0, -theta * n as f64)
        })
    }
}

fn scale_rows(m: &mut CMatrix, d: &DVector<Complex64>) {
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row *= d[i];
    }
}

fn scale_cols(m: &mut CMatrix, d: &DVector<Complex64>) {
    for (j, mut col) in m.column_iter_mut().enumerate() {
        col *= d[j];
    }
}

/// A displacement operator in the truncated basis.
#[derive(Debug, Clone)]
pub struct Displacement {
    pub matrix: CMatrix,
    /// `max |B†B − I|` where `B` keeps the `support` lowest columns and drops
    /// the top quarter of rows.
    pub unitarity_defect: f64,
}

fn displacement_unscreened(mode: &TruncatedMode, beta: Complex64) -> CMatrix {
    let a = mode.annihilation();
    let gen = a.adjoint() * beta - a * beta.conj();
    gen.exp()
}

/// Compressed unitarity defect: how far the faithful block is from isometric.
pub fn unitarity_defect(mode: &TruncatedMode, u: &CMatrix) -> f64 {
    let rows = mode.top_start();
    let cols = mode.support.min(rows);
    let b = u.view((0, 0), (rows, cols));
    let g = b.adjoint() * b;
    let mut worst: f64 = 0.0;
    for i in 0..cols {
        for j in 0..cols {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(id, 0.0)).norm());
        }
    }
    worst
}

/// `D(β) = exp(β a† − β* a)` by scaling-and-squaring on the truncated generator.
pub fn displacement_matrix(mode: &TruncatedMode, beta: Complex64) -> Result<Displacement> {
    let matrix = displacement_unscreened(mode, beta);
    let unitarity_defect = unitarity_defect(mode, &matrix);
    if !(unitarity_defect <= UNITARITY_TOL) {
        return Err(Error::TruncationTooSmall {
            reason: format!(
                "displacement |beta|={:.3e} at cutoff {}: unitarity defect {unitarity_defect:.3e} > {UNITARITY_TOL:e}",
                beta.norm(),
                mode.cutoff
            ),
        });
    }
    Ok(Displacement {
        matrix,
        unitarity_defect,
    })
}

fn closed_form_unscreened(mode: &TruncatedMode, chi: Complex64, tau: f64, sign: f64) -> CMatrix {
    let rot = Complex64::from_polar(1.0, -mode.omega * tau);
    let mut u = displacement_unscreened(mode, chi * rot * sign);
    scale_cols(&mut u, &mode.number_phase(mode.omega * tau));
    u
}

/// `D(±χ e^{−iωτ}) e^{−iωτ n̂}`, the propagator with the global phase dropped.
pub fn evolve_closed_form(
    mode: &TruncatedMode,
    chi: Complex64,
    tau: f64,
    sign: f64,
) -> Result<CMatrix> {
    check_sign(sign)?;
    let rot = Complex64::from_polar(1.0, -mode.omega * tau);
    let mut u = displacement_matrix(mode, chi * rot * sign)?.matrix;
    scale_cols(&mut u, &mode.number_phase(mode.omega * tau));
    Ok(u)
}

fn check_sign(sign: f64) -> Result<()> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::invalid(
            "sign",
            "detector eigenvalue must be +1 or -1",
        ));
    }
    Ok(())
}

/// Time-ordered propagator of `H = ω n̂ + s·f(τ)(a + a†)` on `[0, tau]` as an
/// ordered product of `steps` midpoint interaction-picture factors.
///
/// Each factor `exp(−i s f dt (a e^{−iωt} + a† e^{iωt}))` is applied through
/// the eigendecomposition of the truncated quadrature `a + a†`, so no
/// displacement operator enters this route.
pub fn evolve_trotter<F>(
    mode: &TruncatedMode,
    drive: F,
    tau: f64,
    steps: usize,
    sign: f64,
) -> Result<CMatrix>
where
    F: Fn(f64) -> f64,
{
    check_sign(sign)?;
    if steps == 0 {
        return Err(Error::invalid("steps", "need at least one step"));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid("tau", "proper time must be finite and >= 0"));
    }
    let n = mode.cutoff;
    let a = mode.annihilation();
    let x = (&a + a.adjoint()).map(|z| z.re);
    let eig = SymmetricEigen::new(x);
    let q = eig.eigenvectors;
    let qt = q.transpose();
    let lambdas = eig.eigenvalues;

    let dt = tau / steps as f64;
    // work on real and imaginary parts so the basis changes are real products
    let mut re = DMatrix::<f64>::identity(n, n);
    let mut im = DMatrix::<f64>::zeros(n, n);
    let rotate = |re: &mut DMatrix<f64>, im: &mut DMatrix<f64>, phases: &[Complex64]| {
        for i in 0..n {
            let p = phases[i];
            for j in 0..n {
                let (r, m) = (re[(i, j)], im[(i, j)]);
                re[(i, j)] = p.re * r - p.im * m;
                im[(i, j)] = p.re * m + p.im * r;
            }
        }
    };
    let mut phases = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..steps {
        let t = (s as f64 + 0.5) * dt;
        let theta = mode.omega * t;
        let c = sign * drive(t) * dt;
        // e^{−iθn̂}
        for (k, p) in phases.iter_mut().enumerate() {
            *p = Complex64::from_polar(1.0, -theta * k as f64);
        }
        rotate(&mut re, &mut im, &phases);
        re = &qt * &re;
        im = &qt * &im;
        for (k, p) in phases.iter_mut().enumerate() {
            *p = Complex64::from_polar(1.0, -c * lambdas[k]);
        }
        rotate(&mut re, &mut im, &phases);
        re = &q * &re;
        im = &q * &im;
        for (k, p) in phases.iter_mut().enumerate() {
            *p = Complex64::from_polar(1.0, theta * k as f64);
        }
        rotate(&mut re, &mut im, &phases);
    }
    let mut u = CMatrix::from_fn(n, n, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
    // back to the Schrödinger picture
    scale_rows(&mut u, &mode.number_phase(mode.omega * tau));
    if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numerical("evolve_trotter", "non-finite propagator"));
    }
    Ok(u)
}

/// Spectral norm of `(a − b)` restricted to the `support` lowest columns.
pub fn block_distance(mode: &TruncatedMode, a: &CMatrix, b: &CMatrix) -> f64 {
    let cols = mode.support.min(mode.cutoff);
    let d = (a - b).columns(0, cols).into_owned();
    d.singular_values().max()
}

/// Runs [`evolve_trotter`] at `steps` and `2·steps` and accepts the finer
/// result when the two agree on the faithful block within `tol`.
pub fn evolve_trotter_converged<F>(
    mode: &TruncatedMode,
    drive: F,
    tau: f64,
    steps: usize,
    sign: f64,
    tol: f64,
) -> Result<CMatrix>
where
    F: Fn(f64) -> f64,
{
    let coarse = evolve_trotter(mode, &drive, tau, steps, sign)?;
    let fine = evolve_trotter(mode, &drive, tau, 2 * steps, sign)?;
    let change = block_distance(mode, &coarse, &fine);
    if !(change < tol) {
        return Err(Error::NumericalFailure {
            context: "evolve_trotter".into(),
            reason: format!(
                "doubling {steps} -> {} steps changed the propagator by {change:.3e}",
                2 * steps
            ),
            best_re: f64::NAN,
            best_im: f64::NAN,
            err_estimate: change,
        });
    }
    Ok(fine)
}

/// Density matrix of a single-mode state in the truncated basis.
pub fn density_matrix(family: &StateFamily<f64>, cutoff: usize) -> Result<CMatrix> {
    let zero = Complex64::new(0.0, 0.0);
    let pure = |amps: Vec<Complex64>| {
        let v = DVector::from_vec(amps);
        &v * v.adjoint()
    };
    // α^n/√n! built incrementally
    let coherent = |alpha: Complex64| -> Vec<Complex64> {
        let mut out = Vec::with_capacity(cutoff);
        let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..cutoff {
            out.push(c);
            c = c * alpha / ((n + 1) as f64).sqrt();
        }
        out
    };
    Ok(match *family {
        StateFamily::Fock(n) => {
            let n = n as usize;
            if n >= cutoff {
                return Err(Error::TruncationTooSmall {
                    reason: format!("Fock state |{n}> does not fit in cutoff {cutoff}"),
                });
            }
            let mut amps = vec![zero; cutoff];
            amps[n] = Complex64::new(1.0, 0.0);
            pure(amps)
        }
        StateFamily::Coherent(alpha) => pure(coherent(alpha)),
        StateFamily::Cat(a0) => {
            let plus = coherent(Complex64::new(a0, 0.0));
            let minus = coherent(Complex64::new(-a0, 0.0));
            let norm = (2.0 * (1.0 + (-2.0 * a0 * a0).exp())).sqrt();
            pure(
                plus.iter()
                    .zip(&minus)
                    .map(|(p, m)| (p + m) / norm)
                    .collect(),
            )
        }
        StateFamily::Thermal(nbar) => {
            let mut rho = CMatrix::zeros(cutoff, cutoff);
            let ratio = nbar / (1.0 + nbar);
            let mut p = 1.0 / (1.0 + nbar);
            for n in 0..cutoff {
                rho[(n, n)] = Complex64::new(p, 0.0);
                p *= ratio;
            }
            rho
        }
    })
}

/// Weight missing from the basis plus weight in its top quarter.
fn tail_weight(mode: &TruncatedMode, rho: &CMatrix) -> f64 {
    let total: f64 = (0..mode.cutoff).map(|i| rho[(i, i)].re).sum();
    let top: f64 = (mode.top_start()..mode.cutoff)
        .map(|i| rho[(i, i)].re)
        .sum();
    (1.0 - total).abs() + top
}

fn overlap_signed(
    mode: &TruncatedMode,
    rho: &CMatrix,
    chi: Complex64,
    tau: f64,
    left: f64,
    right: f64,
) -> Result<Complex64> {
    let tail = tail_weight(mode, rho);
    if !(tail <= mode.leak_tol) {
        return Err(Error::TruncationTooSmall {
            reason: format!(
                "state weight {tail:.3e} near cutoff {} exceeds {:e}",
                mode.cutoff, mode.leak_tol
            ),
        });
    }
    let ul = closed_form_unscreened(mode, chi, tau, left);
    let ur = closed_form_unscreened(mode, chi, tau, right);
    for u in [&ul, &ur] {
        let evolved = u * rho * u.adjoint();
        let leak = tail_weight(mode, &evolved);
        if !(leak <= mode.leak_tol) {
            return Err(Error::TruncationTooSmall {
                reason: format!(
                    "evolved state leaks weight {leak:.3e} into the top of cutoff {} (|chi|={:.3e})",
                    mode.cutoff,
                    chi.norm()
                ),
            });
        }
    }
    // Tr{U_l ρ U_r†} = Σ_ij (U_r† U_l)_ij ρ_ji
    let m = ur.adjoint() * ul;
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..mode.cutoff {
        for j in 0..mode.cutoff {
            tr += m[(i, j)] * rho[(j, i)];
        }
    }
    Ok(tr)
}

/// `Tr{U₊ ρ U₋†}` for the given single-mode state.
pub fn overlap_trace(
    family: &StateFamily<f64>,
    mode: &TruncatedMode,
    chi: Complex64,
    tau: f64,
) -> Result<Complex64> {
    let rho = density_matrix(family, mode.cutoff)?;
    overlap_signed(mode, &rho, chi, tau, 1.0, -1.0)
}

/// `Tr{U₋ ρ U₊†}`, the sign-swapped trace.
pub fn overlap_trace_swapped(
    family: &StateFamily<f64>,
    mode: &TruncatedMode,
    chi: Complex64,
    tau: f64,
) -> Result<Complex64> {
    let rho = density_matrix(family, mode.cutoff)?;
    overlap_signed(mode, &rho, chi, tau, -1.0, 1.0)
}

/// Outcome of one end-to-end comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// `w(τ)/w(0)` rebuilt from per-mode traces.
    pub w_ratio: Complex64,
    /// `Σ_k |χ_k|²` over the same modes.
    pub chi_sum: f64,
    /// Witness extracted from the simulated coherence.
    pub simulated: Complex64,
    /// Closed-form witness.
    pub closed_form: Complex64,
    pub gap: f64,
    pub modes: u32,
    pub cutoff: usize,
}

/// Simulates the detector coherence over modes `1..=k_max` in a truncated
/// basis, extracts the witness and compares it with the closed form.
///
/// The decoherence sum runs over exactly the simulated modes, so the two
/// routes must agree up to truncation and rounding.
pub fn end_to_end_check(
    state: &StateSpec<f64>,
    cavity: &CavityConfig<f64>,
    coupling: &CouplingSpec<f64>,
    traj: &TrajectorySpec<f64>,
    tau: f64,
    k_max: u32,
    cutoff: usize,
) -> Result<OracleReport> {
    if state.k0 != cavity.k0 {
        return Err(Error::invalid(
            "k0",
            "state and cavity probe different modes",
        ));
    }
    if cavity.k0 > k_max {
        return Err(Error::invalid(
            "kmax",
            format!("probed mode {} lies above k_max = {k_max}", cavity.k0),
        ));
    }
    let quad = QuadratureOptions::with_tol(1e-13);
    let vacuum = StateFamily::Fock(0);
    let mut w_ratio = Complex64::new(1.0, 0.0);
    let mut chi_sum = 0.0;
    let mut chi_k0 = None;
    for k in 1..=k_max {
        let mode = cavity.mode(k)?;
        let chi = response::chi(&mode, coupling, traj, tau, ChiMethod::Auto, &quad)?;
        let family = if k == cavity.k0 {
            &state.family
        } else {
            &vacuum
        };
        let tm = TruncatedMode::new(cutoff, mode.omega())?;
        w_ratio *= overlap_trace(family, &tm, chi.value, tau)?;
        chi_sum += chi.norm_sqr();
        if k == cavity.k0 {
            chi_k0 = Some(chi);
        }
    }
    let simulated = extract_witness(w_ratio, chi_sum)?;
    let closed_form = state.witness(&chi_k0.expect("k0 <= k_max"))?;
    Ok(OracleReport {
        w_ratio,
        chi_sum,
        simulated,
        closed_form,
        gap: (simulated - closed_form).norm(),
        modes: k_max,
        cutoff,
    })
}

/// Outcome of one named check in [`run_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: String,
    pub outcome: Result<(f64, f64)>,
}

impl SuiteEntry {
    /// Passed when the check ran and its gap is under the threshold.
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Ok((gap, threshold)) if gap < threshold)
    }
}

/// Which checks [`run_suite`] runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    /// Basis size for the end-to-end checks.
    pub cutoff: usize,
    /// Number of simulated modes, `1..=k_max`.
    pub k_max: u32,
    /// Restrict the end-to-end checks to one state family (matched by variant).
    pub only: Option<StateFamily<f64>>,
    pub include_trotter: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            cutoff: 40,
            k_max: 16,
            only: None,
            include_trotter: true,
        }
    }
}

pub const SUITE_GAP: f64 = 1e-6;
pub const TROTTER_GAP: f64 = 1e-5;
pub const SUITE_TAU: f64 = 2.5;

fn same_family(a: &StateFamily<f64>, b: &StateFamily<f64>) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

/// Desk-scale oracle suite: end-to-end checks for Fock-1, cat, coherent and
/// thermal states on static and inertial detectors (`k0 = 2`, `L = 4`,
/// `m = 1`, `λ = 0.4`, 16 modes by default) plus the Trotter cross-check of the
/// forced-oscillator propagator.
pub fn run_suite(config: &SuiteConfig) -> Vec<SuiteEntry> {
    let mut out = Vec::new();
    let families = [
        ("fock:1", StateFamily::Fock(1)),
        ("cat:1", StateFamily::Cat(1.0)),
        (
            "coherent:0.5,0.3",
            StateFamily::Coherent(Complex64::new(0.5, 0.3)),
        ),
        ("thermal:0.5", StateFamily::Thermal(0.5)),
    ];
    let cavity = CavityConfig::at_antinode(4.0, 1.0, 2).expect("valid suite cavity");
    let coupling = CouplingSpec::new(0.4).expect("valid suite coupling");
    let trajs = [
        ("static", TrajectorySpec::fixed(cavity.x0, 4.0)),
        (
            "inertial:0.3",
            TrajectorySpec::inertial(0.3, cavity.x0, 4.0),
        ),
    ]
    .map(|(name, t)| (name, t.expect("valid suite trajectory")));
    for (fname, family) in families {
        if let Some(only) = &config.only {
            if !same_family(only, &family) {
                continue;
            }
        }
        for (tname, traj) in &trajs {
            let outcome = StateSpec::new(family, 2).and_then(|state| {
                end_to_end_check(
                    &state,
                    &cavity,
                    &coupling,
                    traj,
                    SUITE_TAU,
                    config.k_max,
                    config.cutoff,
                )
                .map(|r| (r.gap, SUITE_GAP))
            });
            out.push(SuiteEntry {
                name: format!("end-to-end {fname} {tname}"),
                outcome,
            });
        }
    }
    if config.include_trotter {
        out.push(SuiteEntry {
            name: "trotter vs closed form (cutoff 60)".into(),
            outcome: trotter_check(60, 4096).map(|gap| (gap, TROTTER_GAP)),
        });
    }
    out
}

/// Constant unit drive, `ω = 1`, `τ = π`: the Trotter product against
/// `e^{iβ} D(ζ e^{−iωτ}) e^{−iωτ n̂}` with `ζ` and `β` from quadrature.
pub fn trotter_check(cutoff: usize, steps: usize) -> Result<f64> {
    let omega = 1.0;
    let tau = std::f64::consts::PI;
    let mode = TruncatedMode::new(cutoff, omega)?.with_support(8);
    let drive = |_t: f64| 1.0;
    let trotter = evolve_trotter_converged(&mode, drive, tau, steps, 1.0, TROTTER_GAP)?;
    let quad = QuadratureOptions::with_tol(1e-12);
    let beta = response::phase_beta(drive, omega, 0.0, tau, &quad)?;
    let zeta = forced_displacement(drive, omega, tau)?;
    let closed = evolve_closed_form(&mode, zeta, tau, 1.0)? * Complex64::from_polar(1.0, beta);
    Ok(block_distance(&mode, &trotter, &closed))
}

/// `ζ = −i ∫₀^τ f(t) e^{iωt} dt` by adaptive quadrature.
pub fn forced_displacement<F: Fn(f64) -> f64>(drive: F, omega: f64, tau: f64) -> Result<Complex64> {
    let n = ((tau * omega * 8.0 / (2.0 * std::f64::consts::PI)).ceil() as usize).max(1);
    let breaks = crate::quadrature::uniform_breaks(0.0, tau, n);
    let q = crate::quadrature::integrate(
        |t| Complex64::from_polar(drive(t), omega * t),
        &breaks,
        1e-13,
        10_000,
    );
    if !q.converged {
        return Err(Error::numerical(
            "forced_displacement",
            "quadrature did not converge",
        ));
    }
    Ok(q.value * Complex64::new(0.0, -1.0))
}
