//! Steady state of the RF-dressed four-level ladder and the probe susceptibility.
//!
//! Basis: `|1> = 6S1/2`, `|2> = 6P3/2`, `|3> = 52D5/2`, `|4> = 53P3/2`
//! (indices 0..4 in code). The probe drives 1-2, the coupling laser 2-3 and
//! the RF field 3-4. Decay runs 2 -> 1 (`gamma2`), 3 -> 2 (`gamma3`) and
//! 4 -> 1 (`gamma4`); the last channel closes the system so population is
//! conserved without extra levels, real branching of the Rydberg states is
//! not modelled. Every coherence involving `|3>` or `|4>` is additionally
//! damped at `gamma_deph = 1/T2`. Hyperfine and Zeeman structure is ignored.

use crate::constants::{A0, CS133_MASS, EPS0, E_CHARGE, HBAR, KB, TORR};
use crate::numeric::{integrate_adaptive, AdaptiveOptions};
use crate::{Error, Result, C64};
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{Matrix4, SMatrix, SVector, SymmetricEigen};

/// Number of ladder levels.
pub const LEVELS: usize = 4;
const DIM: usize = LEVELS * LEVELS;

pub type Hamiltonian = Matrix4<C64>;
type Super = SMatrix<C64, DIM, DIM>;

/// Atomic constants of the ladder and the vapor cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderSystem {
    /// Probe wavelength (m).
    pub lambda_probe: f64,
    /// Coupling wavelength (m).
    pub lambda_coupling: f64,
    /// Decay rate of `|2>` (rad/s).
    pub gamma2: f64,
    /// Effective decay rate of `|3>` (rad/s).
    pub gamma3: f64,
    /// Effective decay rate of `|4>` (rad/s).
    pub gamma4: f64,
    /// Extra dephasing of Rydberg coherences, `1/T2` (1/s).
    pub gamma_deph: f64,
    /// Probe transition dipole (C·m).
    pub mu12: f64,
    /// RF transition dipole (C·m).
    pub mu_rf: f64,
    /// Vapor number density (1/m^3).
    pub n_atoms: f64,
    /// Vapor temperature (K).
    pub temperature: f64,
    /// Atomic mass (kg).
    pub atom_mass: f64,
    /// Cell length along the beams (m).
    pub cell_length: f64,
}

/// Room temperature used by the default cell (K).
pub const ROOM_TEMPERATURE: f64 = 295.0;

impl Default for LadderSystem {
    /// Caesium cell at room temperature, `T2 = 0.5 us`, `mu_RF = 1745 e a0`.
    fn default() -> Self {
        Self {
            lambda_probe: 852e-9,
            lambda_coupling: 509e-9,
            gamma2: 2.0 * PI * 5.234e6,
            gamma3: 2.0 * PI * 3.0e3,
            gamma4: 2.0 * PI * 3.5e3,
            gamma_deph: 1.0 / 0.5e-6,
            // effective isotropic dipole of the D2 cycling transition
            mu12: 2.69e-29,
            mu_rf: 1745.0 * E_CHARGE * A0,
            n_atoms: cesium_number_density(ROOM_TEMPERATURE),
            temperature: ROOM_TEMPERATURE,
            atom_mass: CS133_MASS,
            cell_length: 0.03,
        }
    }
}

impl LadderSystem {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_probe", self.lambda_probe),
            ("lambda_coupling", self.lambda_coupling),
            ("atom_mass", self.atom_mass),
            ("cell_length", self.cell_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: "must be positive and finite" });
            }
        }
        let non_negative = [
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
            ("gamma_deph", self.gamma_deph),
            ("mu12", self.mu12),
            ("mu_rf", self.mu_rf),
            ("n_atoms", self.n_atoms),
            ("temperature", self.temperature),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: "must be non-negative and finite" });
            }
        }
        Ok(())
    }

    /// Probe wave number (rad/m).
    pub fn k_probe(&self) -> f64 {
        2.0 * PI / self.lambda_probe
    }

    /// Coupling wave number (rad/m).
    pub fn k_coupling(&self) -> f64 {
        2.0 * PI / self.lambda_coupling
    }

    /// One-dimensional thermal velocity spread `sqrt(kB T / m)` (m/s).
    pub fn thermal_velocity(&self) -> f64 {
        libm::sqrt(KB * self.temperature / self.atom_mass)
    }

    /// RF Rabi frequency produced by a field amplitude `e_field` (V/m).
    pub fn rf_rabi(&self, e_field: f64) -> f64 {
        self.mu_rf * e_field / HBAR
    }
}

/// Caesium vapor density (1/m^3) at temperature `t` (K).
///
/// Uses the two-branch vapor pressure fit
/// `log10(P/torr) = 2.881 + 4.711 - 3999/T` (solid, below the 301.59 K melting
/// point) and `log10(P/torr) = 2.881 + 4.165 - 3830/T` (liquid), with the ideal
/// gas law `n = P / (kB T)`.
pub fn cesium_number_density(t: f64) -> f64 {
    const MELTING_POINT: f64 = 301.59;
    let log_p = if t < MELTING_POINT { 2.881 + 4.711 - 3999.0 / t } else { 2.881 + 4.165 - 3830.0 / t };
    libm::pow(10.0, log_p) * TORR / (KB * t)
}

/// Rabi frequencies and detunings of one operating point (all rad/s).
///
/// Detunings are laser minus atomic frequency for each step of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldDrive {
    pub omega_p: f64,
    pub omega_c: f64,
    pub omega_rf: f64,
    pub delta_p: f64,
    pub delta_c: f64,
    pub delta_rf: f64,
}

impl FieldDrive {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega_p", self.omega_p), ("omega_c", self.omega_c), ("omega_rf", self.omega_rf)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: "Rabi frequency must be non-negative" });
            }
        }
        for (name, v) in [("delta_p", self.delta_p), ("delta_c", self.delta_c), ("delta_rf", self.delta_rf)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "detuning must be finite" });
            }
        }
        Ok(())
    }
}

/// Row-major density matrix of the ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Matrix4<C64>);

impl DensityMatrix {
    /// `rho_ij = <i|rho|j>` with zero-based level indices.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Probe coherence `rho_21`.
    pub fn probe_coherence(&self) -> C64 {
        self.0[(1, 0)]
    }

    pub fn populations(&self) -> [f64; LEVELS] {
        core::array::from_fn(|i| self.0[(i, i)].re)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..LEVELS {
            for j in 0..LEVELS {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; LEVELS] {
        let herm = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: [f64; LEVELS] = SymmetricEigen::new(herm).eigenvalues.into();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Rotating-frame Hamiltonian in units of hbar (rad/s) for atoms moving at `v`
/// along the probe direction.
///
/// The coupling beam counter-propagates, so the atom sees the probe detuned by
/// `delta_p - k_p v` and the coupling by `delta_c + k_c v`. The diagonal holds
/// the cumulative detunings with a minus sign; couplings are `-Omega/2`.
pub fn build_hamiltonian(sys: &LadderSystem, drive: &FieldDrive, v: f64) -> Hamiltonian {
    let d2 = drive.delta_p - sys.k_probe() * v;
    let d3 = d2 + drive.delta_c + sys.k_coupling() * v;
    let d4 = d3 + drive.delta_rf;
    let mut h = Hamiltonian::zeros();
    h[(1, 1)] = C64::new(-d2, 0.0);
    h[(2, 2)] = C64::new(-d3, 0.0);
    h[(3, 3)] = C64::new(-d4, 0.0);
    for (i, omega) in [drive.omega_p, drive.omega_c, drive.omega_rf].into_iter().enumerate() {
        let c = C64::new(-0.5 * omega, 0.0);
        h[(i, i + 1)] = c;
        h[(i + 1, i)] = c;
    }
    h
}

/// Superoperator acting on the row-major vectorisation `rho[4 i + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian(pub Box16);

/// Boxed so that the 4 KiB matrix does not live on small stacks.
pub type Box16 = alloc::boxed::Box<Super>;

impl Liouvillian {
    /// Apply to a matrix, returning `d rho / dt`.
    pub fn apply(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        let x = vectorize(rho);
        let y = *self.0 * x;
        Matrix4::from_fn(|i, j| y[LEVELS * i + j])
    }
}

fn vectorize(rho: &Matrix4<C64>) -> SVector<C64, DIM> {
    SVector::from_fn(|k, _| rho[(k / LEVELS, k % LEVELS)])
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    LEVELS * i + j
}

fn add_dissipators(l: &mut Super, sys: &LadderSystem) {
    // (to, from, rate)
    let decays = [(0, 1, sys.gamma2), (1, 2, sys.gamma3), (0, 3, sys.gamma4)];
    for (a, b, rate) in decays {
        l[(idx(a, a), idx(b, b))] += C64::new(rate, 0.0);
        for k in 0..LEVELS {
            l[(idx(b, k), idx(b, k))] -= C64::new(0.5 * rate, 0.0);
            l[(idx(k, b), idx(k, b))] -= C64::new(0.5 * rate, 0.0);
        }
    }
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            if i != j && (i >= 2 || j >= 2) {
                l[(idx(i, j), idx(i, j))] -= C64::new(sys.gamma_deph, 0.0);
            }
        }
    }
}

fn add_commutator(l: &mut Super, h: &Hamiltonian) {
    let minus_i = C64::new(0.0, -1.0);
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            for k in 0..LEVELS {
                l[(idx(i, j), idx(k, j))] += minus_i * h[(i, k)];
                l[(idx(i, j), idx(i, k))] -= minus_i * h[(k, j)];
            }
        }
    }
}

/// Lindblad generator `-i[H, rho] + sum_k D[C_k] rho` plus Rydberg dephasing.
pub fn build_liouvillian(h: &Hamiltonian, sys: &LadderSystem) -> Liouvillian {
    let mut l = alloc::boxed::Box::new(Super::zeros());
    add_dissipators(&mut l, sys);
    add_commutator(&mut l, h);
    Liouvillian(l)
}

/// Relative pivot below which the steady-state system counts as singular.
pub const SINGULAR_PIVOT: f64 = 1e-13;
/// Bound on the scaled residual `|L rho| / max|L|` of an accepted solution.
pub const RESIDUAL_BOUND: f64 = 1e-10;

/// Solve `L rho = 0` with `tr rho = 1`.
///
/// The generator is scaled by its largest entry, the equation for `rho_11`
/// (redundant under trace preservation) is replaced by the trace condition,
/// and the system is solved by LU with partial pivoting. Degenerate
/// parameters are reported as [`Error::SingularSystem`], never regularised.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let scale = l.0.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::SingularSystem { pivot: 0.0 });
    }
    let inv = C64::new(1.0 / scale, 0.0);
    let mut a: Super = *l.0 * inv;
    let scaled = a;
    for k in 0..DIM {
        a[(0, k)] = C64::new(0.0, 0.0);
    }
    for i in 0..LEVELS {
        a[(0, idx(i, i))] = C64::new(1.0, 0.0);
    }
    let mut b = SVector::<C64, DIM>::zeros();
    b[0] = C64::new(1.0, 0.0);

    let lu = a.lu();
    let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, z| m.min(z.norm()));
    if !(pivot > SINGULAR_PIVOT) {
        return Err(Error::SingularSystem { pivot });
    }
    let x = lu.solve(&b).ok_or(Error::SingularSystem { pivot: 0.0 })?;
    let residual = (scaled * x).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if !(residual < RESIDUAL_BOUND) {
        return Err(Error::SingularSystem { pivot });
    }
    Ok(DensityMatrix(Matrix4::from_fn(|i, j| x[idx(i, j)])))
}

/// Steady state for atoms moving at velocity `v`.
pub fn steady_state_at(sys: &LadderSystem, drive: &FieldDrive, v: f64) -> Result<DensityMatrix> {
    let h = build_hamiltonian(sys, drive, v);
    steady_state(&build_liouvillian(&h, sys))
}

/// Thermal velocity spread below which the distribution is treated as a delta.
pub const COLD_VELOCITY_FLOOR: f64 = 1e-9;
/// Doppler-average bounds in units of the thermal velocity.
pub const VELOCITY_SPAN: f64 = 8.0;

/// Quadrature tolerance for Doppler averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerOptions {
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for DopplerOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-7, max_panels: 6000 }
    }
}

/// Velocities (m/s) at which the ladder has resonant structure: one-photon
/// probe resonance and its coupling-dressed partners, and the two-photon
/// resonances of the RF-dressed Rydberg pair.
pub fn resonant_velocities(sys: &LadderSystem, drive: &FieldDrive) -> Vec<f64> {
    let kp = sys.k_probe();
    let mismatch = sys.k_coupling() - kp;
    let mut out = Vec::with_capacity(8);
    for shift in [0.0, 0.5 * drive.omega_c, -0.5 * drive.omega_c] {
        out.push((drive.delta_p - shift) / kp);
    }
    let root = 0.5 * libm::hypot(drive.delta_rf, drive.omega_rf);
    for d3 in [0.0, -0.5 * drive.delta_rf + root, -0.5 * drive.delta_rf - root] {
        // d3 = delta_p + delta_c + (k_c - k_p) v
        if mismatch != 0.0 {
            out.push((d3 - drive.delta_p - drive.delta_c) / mismatch);
        }
    }
    out
}

/// Maxwell-Boltzmann average of `f(v)` over the 1-D velocity distribution.
///
/// Integrates on `[-8 v_th, 8 v_th]` with adaptive Gauss-Kronrod panels whose
/// initial edges sit on the resonant velocities of `drive`. Cold vapors
/// (`v_th` below [`COLD_VELOCITY_FLOOR`]) return `f(0)`.
pub fn doppler_average<F>(sys: &LadderSystem, drive: &FieldDrive, f: F) -> Result<C64>
where
    F: FnMut(f64) -> Result<C64>,
{
    doppler_average_with(sys, drive, DopplerOptions::default(), f)
}

pub fn doppler_average_with<F>(sys: &LadderSystem, drive: &FieldDrive, opts: DopplerOptions, f: F) -> Result<C64>
where
    F: FnMut(f64) -> Result<C64>,
{
    average_over(sys, &resonant_velocities(sys, drive), opts, f)
}

fn average_over<F>(sys: &LadderSystem, resonances: &[f64], opts: DopplerOptions, mut f: F) -> Result<C64>
where
    F: FnMut(f64) -> Result<C64>,
{
    let vth = sys.thermal_velocity();
    if !(vth >= COLD_VELOCITY_FLOOR) {
        return f(0.0);
    }
    let span = VELOCITY_SPAN * vth;
    let mut breaks: Vec<f64> = (0..=16).map(|i| -span + span * i as f64 / 8.0).collect();
    breaks.extend(resonances.iter().copied().filter(|v| v.abs() < span));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let norm = 1.0 / (libm::sqrt(2.0 * PI) * vth);
    let mut failure = None;
    let value = integrate_adaptive(
        |v| {
            let weight = norm * libm::exp(-0.5 * (v / vth) * (v / vth));
            match f(v) {
                Ok(z) => z * weight,
                Err(e) => {
                    failure.get_or_insert(e);
                    C64::new(0.0, 0.0)
                }
            }
        },
        &breaks,
        AdaptiveOptions { rel_tol: opts.rel_tol, abs_tol: 0.0, max_panels: opts.max_panels },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    value
}

/// Conversion factor from the Doppler-averaged coherence to susceptibility.
fn chi_prefactor(sys: &LadderSystem, drive: &FieldDrive) -> Result<f64> {
    if !(drive.omega_p > 0.0) {
        return Err(Error::Domain("susceptibility needs a non-zero probe Rabi frequency"));
    }
    Ok(2.0 * sys.n_atoms * sys.mu12 * sys.mu12 / (EPS0 * HBAR * drive.omega_p))
}

/// Complex probe susceptibility at the probe detuning of `drive`.
///
/// `chi = 2 N mu12^2 <rho_21> / (eps0 hbar Omega_p)` with the velocity-averaged
/// probe coherence. `Im chi > 0` is absorption.
pub fn susceptibility(sys: &LadderSystem, drive: &FieldDrive) -> Result<C64> {
    susceptibility_with(sys, drive, DopplerOptions::default())
}

pub fn susceptibility_with(sys: &LadderSystem, drive: &FieldDrive, opts: DopplerOptions) -> Result<C64> {
    sys.validate()?;
    drive.validate()?;
    let pre = chi_prefactor(sys, drive)?;
    if sys.n_atoms == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let rho21 = doppler_average_with(sys, drive, opts, |v| Ok(steady_state_at(sys, drive, v)?.probe_coherence()))?;
    Ok(rho21 * pre)
}

/// `chi(drive) - chi(reference)` integrated as a single velocity average of the
/// coherence difference.
///
/// Small field-induced changes are resolved to the quadrature tolerance of the
/// difference itself rather than of the full susceptibility.
pub fn susceptibility_shift(
    sys: &LadderSystem,
    drive: &FieldDrive,
    reference: &FieldDrive,
    opts: DopplerOptions,
) -> Result<C64> {
    sys.validate()?;
    drive.validate()?;
    reference.validate()?;
    let pre = chi_prefactor(sys, drive)?;
    if pre != chi_prefactor(sys, reference)? {
        return Err(Error::Domain("reference drive must share the probe Rabi frequency"));
    }
    if sys.n_atoms == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    // break points of both drives so neither drive's structure is missed
    let mut resonances = resonant_velocities(sys, reference);
    resonances.extend(resonant_velocities(sys, drive));
    let diff = average_over(sys, &resonances, opts, |v| {
        let a = steady_state_at(sys, drive, v)?.probe_coherence();
        let b = steady_state_at(sys, reference, v)?.probe_coherence();
        Ok(a - b)
    })?;
    Ok(diff * pre)
}
