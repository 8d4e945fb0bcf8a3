//! Uncertain systems as LFT interconnections (G, Δ): a nominal LTI
//! system in feedback with a structured, repeated-scalar time-varying
//! gain. Supports evaluation at frozen parameter values and lifting of
//! affine parameter dependence into LFT form.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, hstack, vstack};
use crate::report::{Check, Report};

/// Optional control channel of the nominal system: u enters the state
/// and uncertainty-input equations; feedthrough to the measured output
/// must be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlChannel {
    pub b_g3: DMatrix<f64>,
    pub d_g13: DMatrix<f64>,
    pub d_g23: DMatrix<f64>,
}

/// Nominal system G partitioned by channels:
///
/// ```text
/// x(k+1) = A_G x + B_G1 theta + B_G2 d  [+ B_G3 u]
/// phi    = C_G1 x + D_G11 theta + D_G12 d  [+ D_G13 u]
/// y      = C_G2 x + D_G21 theta + D_G22 d  [+ 0 u]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpacePartition {
    pub a_g: DMatrix<f64>,
    pub b_g1: DMatrix<f64>,
    pub b_g2: DMatrix<f64>,
    pub c_g1: DMatrix<f64>,
    pub d_g11: DMatrix<f64>,
    pub d_g12: DMatrix<f64>,
    pub c_g2: DMatrix<f64>,
    pub d_g21: DMatrix<f64>,
    pub d_g22: DMatrix<f64>,
    pub control: Option<ControlChannel>,
}

/// Channel dimensions of an LFT system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n_g: usize,
    pub n_phi: usize,
    pub n_theta: usize,
    pub n_d: usize,
    pub n_y: usize,
    pub n_u: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Sltv,
}

/// One repeated-scalar uncertainty block: delta_j(k) * I_copies with
/// |delta_j(k)| <= alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyBlock {
    pub kind: BlockKind,
    pub alpha: f64,
    pub copies: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyStructure {
    pub blocks: Vec<UncertaintyBlock>,
}

impl UncertaintyStructure {
    pub fn sltv(alpha: f64, copies: usize) -> Self {
        UncertaintyStructure {
            blocks: vec![UncertaintyBlock {
                kind: BlockKind::Sltv,
                alpha,
                copies,
            }],
        }
    }

    pub fn total_copies(&self) -> usize {
        self.blocks.iter().map(|b| b.copies).sum()
    }

    pub fn num_params(&self) -> usize {
        self.blocks.len()
    }

    /// One scalar per block expanded to one scalar per copy.
    pub fn per_copy(&self, delta: &[f64]) -> Result<Vec<f64>> {
        if delta.len() != self.blocks.len() {
            return Err(Error::dim(
                "delta vector",
                format!("{} blocks", self.blocks.len()),
                format!("{}", delta.len()),
            ));
        }
        let mut out = Vec::with_capacity(self.total_copies());
        for (b, &d) in self.blocks.iter().zip(delta) {
            out.extend(std::iter::repeat(d).take(b.copies));
        }
        Ok(out)
    }

    pub fn check_admissible(&self, delta: &[f64]) -> Result<()> {
        if delta.len() != self.blocks.len() {
            return Err(Error::dim(
                "delta vector",
                format!("{} blocks", self.blocks.len()),
                format!("{}", delta.len()),
            ));
        }
        for (j, (b, &d)) in self.blocks.iter().zip(delta).enumerate() {
            if !d.is_finite() || d.abs() > b.alpha {
                return Err(Error::InvalidInput(format!(
                    "delta[{j}] = {d} violates |delta| <= {}",
                    b.alpha
                )));
            }
        }
        Ok(())
    }
}

/// Uncertain system (G, Δ) with a consistency- and well-posedness-checked
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LftSystem {
    g: StateSpacePartition,
    delta: UncertaintyStructure,
    dims: Dims,
}

fn dims_of(g: &StateSpacePartition) -> Dims {
    Dims {
        n_g: g.a_g.nrows(),
        n_phi: g.c_g1.nrows(),
        n_theta: g.b_g1.ncols(),
        n_d: g.b_g2.ncols(),
        n_y: g.c_g2.nrows(),
        n_u: g.control.as_ref().map_or(0, |c| c.b_g3.ncols()),
    }
}

/// Report-based validation of an LFT candidate: dimension consistency,
/// finiteness, zero u->y feedthrough, and the sampled well-posedness
/// certificate (all vertex assignments of delta plus a 9-point grid per
/// parameter spanning [-alpha, alpha]).
pub fn validate(g: &StateSpacePartition, delta: &UncertaintyStructure) -> Report {
    let mut report = Report::new();
    let d = dims_of(g);

    let mut dim_ok = true;
    let mut expect = |name: &str, rows: usize, cols: usize, m: &DMatrix<f64>| -> Check {
        let ok = m.nrows() == rows && m.ncols() == cols;
        Check::of(
            format!("dims[{name}]"),
            ok,
            format!(
                "expected {}x{}, found {}x{}",
                rows,
                cols,
                m.nrows(),
                m.ncols()
            ),
        )
    };
    for (name, rows, cols, m) in [
        ("A_G", d.n_g, d.n_g, &g.a_g),
        ("B_G1", d.n_g, d.n_theta, &g.b_g1),
        ("B_G2", d.n_g, d.n_d, &g.b_g2),
        ("C_G1", d.n_phi, d.n_g, &g.c_g1),
        ("D_G11", d.n_phi, d.n_theta, &g.d_g11),
        ("D_G12", d.n_phi, d.n_d, &g.d_g12),
        ("C_G2", d.n_y, d.n_g, &g.c_g2),
        ("D_G21", d.n_y, d.n_theta, &g.d_g21),
        ("D_G22", d.n_y, d.n_d, &g.d_g22),
    ] {
        let c = expect(name, rows, cols, m);
        dim_ok &= c.passed;
        report.push(c);
    }
    if let Some(ctrl) = &g.control {
        for (name, rows, cols, m) in [
            ("B_G3", d.n_g, d.n_u, &ctrl.b_g3),
            ("D_G13", d.n_phi, d.n_u, &ctrl.d_g13),
            ("D_G23", d.n_y, d.n_u, &ctrl.d_g23),
        ] {
            let c = expect(name, rows, cols, m);
            dim_ok &= c.passed;
            report.push(c);
        }
        let zero = ctrl.d_g23.iter().all(|&v| v == 0.0);
        report.push(Check::of(
            "zero_u_to_y_feedthrough",
            zero,
            if zero {
                "D_G23 == 0".to_string()
            } else {
                "D_G23 has nonzero entries".to_string()
            },
        ));
    }

    // Square Delta with matching copy count.
    let copies = delta.total_copies();
    report.push(Check::of(
        "square_uncertainty",
        d.n_phi == d.n_theta && copies == d.n_theta,
        format!(
            "n_phi = {}, n_theta = {}, total copies = {}",
            d.n_phi, d.n_theta, copies
        ),
    ));
    for (j, b) in delta.blocks.iter().enumerate() {
        report.push(Check::of(
            format!("block[{j}].alpha_positive"),
            b.alpha > 0.0 && b.alpha.is_finite(),
            format!("alpha = {}", b.alpha),
        ));
    }

    let mut finite = true;
    for m in [
        &g.a_g, &g.b_g1, &g.b_g2, &g.c_g1, &g.d_g11, &g.d_g12, &g.c_g2, &g.d_g21, &g.d_g22,
    ] {
        finite &= m.iter().all(|v| v.is_finite());
    }
    if let Some(ctrl) = &g.control {
        for m in [&ctrl.b_g3, &ctrl.d_g13, &ctrl.d_g23] {
            finite &= m.iter().all(|v| v.is_finite());
        }
    }
    report.push(Check::of(
        "finite_entries",
        finite,
        if finite { "all entries finite" } else { "non-finite entry present" }.to_string(),
    ));

    if dim_ok && finite && d.n_phi == d.n_theta && copies == d.n_theta {
        report.push(well_posedness_check(g, delta));
    }
    report
}

/// Sampled well-posedness certificate for det(I - D_G11 Delta).
fn well_posedness_check(g: &StateSpacePartition, delta: &UncertaintyStructure) -> Check {
    let m = delta.num_params();
    if delta.total_copies() == 0 {
        return Check::pass("well_posed", "no uncertainty channels");
    }
    let scale = 1.0f64.max(g.d_g11.norm());
    let threshold = 1e-8 * scale;

    let det_at = |d: &[f64]| -> f64 {
        let per_copy = delta.per_copy(d).expect("sized above");
        let n = per_copy.len();
        let mut mat = DMatrix::identity(n, n);
        for i in 0..n {
            for j in 0..n {
                mat[(i, j)] -= g.d_g11[(i, j)] * per_copy[j];
            }
        }
        mat.determinant()
    };

    // All vertex assignments.
    for bits in 0..(1u64 << m) {
        let d: Vec<f64> = delta
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| if bits >> j & 1 == 1 { b.alpha } else { -b.alpha })
            .collect();
        let det = det_at(&d);
        if det.abs() < threshold {
            return Check::fail(
                "well_posed",
                format!("|det(I - D11*Delta)| = {:.3e} at vertex delta {:?}", det.abs(), d),
            );
        }
    }

    // Interior grid: 9 points per parameter spanning [-alpha, alpha].
    const POINTS: usize = 9;
    if m <= 5 {
        let total = POINTS.pow(m as u32);
        for idx in 0..total {
            let mut rem = idx;
            let d: Vec<f64> = delta
                .blocks
                .iter()
                .map(|b| {
                    let k = rem % POINTS;
                    rem /= POINTS;
                    -b.alpha + 2.0 * b.alpha * (k as f64) / ((POINTS - 1) as f64)
                })
                .collect();
            let det = det_at(&d);
            if det.abs() < threshold {
                return Check::fail(
                    "well_posed",
                    format!("|det(I - D11*Delta)| = {:.3e} at delta {:?}", det.abs(), d),
                );
            }
        }
    } else {
        let mut rng = crate::sim::rng::Rng::seed_from(0x1f71);
        for _ in 0..10_000 {
            let d: Vec<f64> = delta
                .blocks
                .iter()
                .map(|b| rng.uniform_in(-b.alpha, b.alpha))
                .collect();
            let det = det_at(&d);
            if det.abs() < threshold {
                return Check::fail(
                    "well_posed",
                    format!("|det(I - D11*Delta)| = {:.3e} at delta {:?}", det.abs(), d),
                );
            }
        }
    }
    Check::pass("well_posed", format!("min |det| above {threshold:.3e} on all samples"))
}

/// The four state-space matrices of the uncertain system frozen at a
/// parameter value, plus the control-channel blocks when present.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedLti {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub b_u: Option<DMatrix<f64>>,
    pub d_yu: Option<DMatrix<f64>>,
}

impl LftSystem {
    /// Build a system, rejecting any candidate that fails validation.
    pub fn new(g: StateSpacePartition, delta: UncertaintyStructure) -> Result<Self> {
        let report = validate(&g, &delta);
        if !report.passed() {
            let detail: Vec<String> = report
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect();
            return Err(Error::InvalidInput(format!(
                "invalid LFT system: {}",
                detail.join("; ")
            )));
        }
        let dims = dims_of(&g);
        Ok(LftSystem { g, delta, dims })
    }

    pub fn partition(&self) -> &StateSpacePartition {
        &self.g
    }

    pub fn uncertainty(&self) -> &UncertaintyStructure {
        &self.delta
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn has_control(&self) -> bool {
        self.g.control.is_some()
    }

    /// Attach a control channel to a system built without one.
    pub fn with_control_channel(
        self,
        b_g3: DMatrix<f64>,
        d_g13: DMatrix<f64>,
    ) -> Result<Self> {
        let n_u = b_g3.ncols();
        let d_g23 = DMatrix::zeros(self.dims.n_y, n_u);
        let mut g = self.g;
        g.control = Some(ControlChannel { b_g3, d_g13, d_g23 });
        LftSystem::new(g, self.delta)
    }

    /// Re-run the validation report on an already-built system.
    pub fn validate(&self) -> Report {
        validate(&self.g, &self.delta)
    }

    /// Evaluate the uncertain system at a frozen parameter value.
    ///
    /// The pure-nominal case delta = 0 skips the feedback inversion, so
    /// the nominal blocks come back bit-identical.
    pub fn eval_at_delta(&self, delta: &[f64]) -> Result<EvaluatedLti> {
        self.delta.check_admissible(delta)?;
        let g = &self.g;

        if delta.iter().all(|&d| d == 0.0) {
            return Ok(EvaluatedLti {
                a: g.a_g.clone(),
                b: g.b_g2.clone(),
                c: g.c_g2.clone(),
                d: g.d_g22.clone(),
                b_u: g.control.as_ref().map(|c| c.b_g3.clone()),
                d_yu: g
                    .control
                    .as_ref()
                    .map(|c| DMatrix::zeros(self.dims.n_y, c.b_g3.ncols())),
            });
        }

        let per_copy = self.delta.per_copy(delta)?;
        let n_phi = per_copy.len();
        let mut m = DMatrix::identity(n_phi, n_phi);
        for i in 0..n_phi {
            for j in 0..n_phi {
                m[(i, j)] -= g.d_g11[(i, j)] * per_copy[j];
            }
        }
        let scale = 1.0f64.max(m.norm());
        let lu = m.clone().lu();
        let det = lu.determinant();
        if !det.is_finite() || det.abs() < 1e-12 * scale {
            return Err(Error::IllPosed {
                delta: delta.to_vec(),
                det_abs: det.abs(),
            });
        }

        // K = Delta (I - D11 Delta)^{-1} applied to each right factor.
        let apply = |z: &DMatrix<f64>| -> DMatrix<f64> {
            let mut solved = lu.solve(z).expect("nonsingular by determinant check");
            for i in 0..n_phi {
                for c in 0..solved.ncols() {
                    solved[(i, c)] *= per_copy[i];
                }
            }
            solved
        };

        let kc = apply(&g.c_g1);
        let kd = apply(&g.d_g12);
        let a = &g.a_g + &g.b_g1 * &kc;
        let b = &g.b_g2 + &g.b_g1 * &kd;
        let c = &g.c_g2 + &g.d_g21 * &kc;
        let d = &g.d_g22 + &g.d_g21 * &kd;
        let (b_u, d_yu) = match &g.control {
            Some(ctrl) => {
                let ku = apply(&ctrl.d_g13);
                (
                    Some(&ctrl.b_g3 + &g.b_g1 * &ku),
                    Some(&g.d_g21 * &ku),
                )
            }
            None => (None, None),
        };
        Ok(EvaluatedLti { a, b, c, d, b_u, d_yu })
    }
}

/// Matrix families with affine parameter dependence:
/// A(delta) = a[0] + sum_j delta_j a[j], and likewise for B, C, D.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFamily {
    pub a: Vec<DMatrix<f64>>,
    pub b: Vec<DMatrix<f64>>,
    pub c: Vec<DMatrix<f64>>,
    pub d: Vec<DMatrix<f64>>,
}

impl AffineFamily {
    pub fn num_params(&self) -> Result<usize> {
        let m = self.a.len();
        if m == 0 || self.b.len() != m || self.c.len() != m || self.d.len() != m {
            return Err(Error::dim(
                "AffineFamily",
                "equal family lengths >= 1",
                format!(
                    "a: {}, b: {}, c: {}, d: {}",
                    self.a.len(),
                    self.b.len(),
                    self.c.len(),
                    self.d.len()
                ),
            ));
        }
        Ok(m - 1)
    }

    /// Direct affine evaluation, the reference path for round-trip checks.
    pub fn eval(&self, delta: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let m = self.num_params()?;
        if delta.len() != m {
            return Err(Error::dim(
                "AffineFamily::eval",
                format!("{m} parameters"),
                format!("{}", delta.len()),
            ));
        }
        let mut a = self.a[0].clone();
        let mut b = self.b[0].clone();
        let mut c = self.c[0].clone();
        let mut d = self.d[0].clone();
        for (j, &dj) in delta.iter().enumerate() {
            a += &self.a[j + 1] * dj;
            b += &self.b[j + 1] * dj;
            c += &self.c[j + 1] * dj;
            d += &self.d[j + 1] * dj;
        }
        Ok((a, b, c, d))
    }
}

/// Lift affine parameter dependence into LFT form with minimal copy
/// counts (rank factorization of each parameter's stacked coefficient
/// block, tolerance 1e-12 relative to its largest singular value).
pub fn affine_to_lft(family: &AffineFamily, bounds: &[f64]) -> Result<LftSystem> {
    let m = family.num_params()?;
    if bounds.len() != m {
        return Err(Error::dim(
            "affine_to_lft bounds",
            format!("{m} parameters"),
            format!("{}", bounds.len()),
        ));
    }
    let n = family.a[0].nrows();
    let n_d = family.b[0].ncols();
    let n_y = family.c[0].nrows();
    for j in 0..=m {
        let shapes_ok = family.a[j].nrows() == n
            && family.a[j].ncols() == n
            && family.b[j].nrows() == n
            && family.b[j].ncols() == n_d
            && family.c[j].nrows() == n_y
            && family.c[j].ncols() == n
            && family.d[j].nrows() == n_y
            && family.d[j].ncols() == n_d;
        if !shapes_ok {
            return Err(Error::dim(
                "affine_to_lft",
                format!("family {j} shaped ({n}x{n}, {n}x{n_d}, {n_y}x{n}, {n_y}x{n_d})"),
                "inconsistent member".to_string(),
            ));
        }
        ensure_finite(&family.a[j], "affine_to_lft a")?;
        ensure_finite(&family.b[j], "affine_to_lft b")?;
        ensure_finite(&family.c[j], "affine_to_lft c")?;
        ensure_finite(&family.d[j], "affine_to_lft d")?;
    }

    let mut left_a: Vec<DMatrix<f64>> = Vec::new();
    let mut left_c: Vec<DMatrix<f64>> = Vec::new();
    let mut right_a: Vec<DMatrix<f64>> = Vec::new();
    let mut right_b: Vec<DMatrix<f64>> = Vec::new();
    let mut blocks = Vec::new();

    for j in 0..m {
        let alpha = bounds[j];
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bound alpha[{j}] must be positive, got {alpha}"
            )));
        }
        let stacked = vstack(&[
            &hstack(&[&family.a[j + 1], &family.b[j + 1]]),
            &hstack(&[&family.c[j + 1], &family.d[j + 1]]),
        ]);
        let svd = stacked.clone().svd(true, true);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let tol = 1e-12 * sigma_max.max(1.0);
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        if rank > 0 {
            let u = svd.u.as_ref().expect("svd u");
            let vt = svd.v_t.as_ref().expect("svd vt");
            let mut l = DMatrix::zeros(n + n_y, rank);
            let mut r = DMatrix::zeros(rank, n + n_d);
            for k in 0..rank {
                let s = svd.singular_values[k];
                for i in 0..(n + n_y) {
                    l[(i, k)] = u[(i, k)] * s;
                }
                for c in 0..(n + n_d) {
                    r[(k, c)] = vt[(k, c)];
                }
            }
            left_a.push(l.view((0, 0), (n, rank)).into_owned());
            left_c.push(l.view((n, 0), (n_y, rank)).into_owned());
            right_a.push(r.view((0, 0), (rank, n)).into_owned());
            right_b.push(r.view((0, n), (rank, n_d)).into_owned());
            blocks.push(UncertaintyBlock {
                kind: BlockKind::Sltv,
                alpha,
                copies: rank,
            });
        }
    }

    let n_theta: usize = blocks.iter().map(|b| b.copies).sum();
    let (b_g1, d_g21, c_g1, d_g12) = if n_theta == 0 {
        (
            DMatrix::zeros(n, 0),
            DMatrix::zeros(n_y, 0),
            DMatrix::zeros(0, n),
            DMatrix::zeros(0, n_d),
        )
    } else {
        (
            hstack(&left_a.iter().collect::<Vec<_>>()),
            hstack(&left_c.iter().collect::<Vec<_>>()),
            vstack(&right_a.iter().collect::<Vec<_>>()),
            vstack(&right_b.iter().collect::<Vec<_>>()),
        )
    };

    let g = StateSpacePartition {
        a_g: family.a[0].clone(),
        b_g1,
        b_g2: family.b[0].clone(),
        c_g1,
        d_g11: DMatrix::zeros(n_theta, n_theta),
        d_g12,
        c_g2: family.c[0].clone(),
        d_g21,
        d_g22: family.d[0].clone(),
        control: None,
    };
    LftSystem::new(g, UncertaintyStructure { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_dependence_structure_validates() {
        let sys = fixtures::quadratic_dependence_example(&[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]);
        let report = sys.validate();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn well_posedness_fails_at_half() {
        let g = StateSpacePartition {
            a_g: DMatrix::from_row_slice(1, 1, &[0.5]),
            b_g1: DMatrix::from_row_slice(1, 1, &[1.0]),
            b_g2: DMatrix::zeros(1, 0),
            c_g1: DMatrix::from_row_slice(1, 1, &[1.0]),
            d_g11: DMatrix::from_row_slice(1, 1, &[2.0]),
            d_g12: DMatrix::zeros(1, 0),
            c_g2: DMatrix::from_row_slice(1, 1, &[1.0]),
            d_g21: DMatrix::zeros(1, 1),
            d_g22: DMatrix::zeros(1, 0),
            control: None,
        };
        let delta = UncertaintyStructure::sltv(1.0, 1);
        let report = validate(&g, &delta);
        assert!(!report.passed());
        let fail = report.failures().next().unwrap();
        assert_eq!(fail.name, "well_posed");
        assert!(fail.detail.contains("0.5"), "{}", fail.detail);
    }

    #[test]
    fn dimension_check_fails_on_bad_b_g1() {
        let g = StateSpacePartition {
            a_g: DMatrix::identity(2, 2).scale(0.5),
            b_g1: DMatrix::zeros(2, 3), // should have 1 column
            b_g2: DMatrix::zeros(2, 1),
            c_g1: DMatrix::zeros(1, 2),
            d_g11: DMatrix::zeros(1, 1),
            d_g12: DMatrix::zeros(1, 1),
            c_g2: DMatrix::zeros(1, 2),
            d_g21: DMatrix::zeros(1, 1),
            d_g22: DMatrix::zeros(1, 1),
            control: None,
        };
        let delta = UncertaintyStructure::sltv(1.0, 1);
        let report = validate(&g, &delta);
        assert!(!report.passed());
        assert!(report.failures().any(|c| c.name.contains("B_G1") || c.name.contains("square")));
        assert!(LftSystem::new(g, delta).is_err());
    }

    #[test]
    fn eval_at_zero_is_bit_identical_nominal() {
        let sys = fixtures::quadratic_dependence_example(&[0.3, 0.2, 1.0, 0.5, 0.1, 0.4, 1.0], &[0.7, -0.2]);
        let ev = sys.eval_at_delta(&[0.0]).unwrap();
        assert_eq!(ev.a, sys.partition().a_g);
        assert_eq!(ev.b, sys.partition().b_g2);
        assert_eq!(ev.c, sys.partition().c_g2);
        assert_eq!(ev.d, sys.partition().d_g22);
    }

    #[test]
    fn quadratic_dependence_eval_matches_polynomial() {
        // a3 = a4 = a7 = 1, all other coefficients zero, delta = 0.5:
        // entry (0,1) = a2 + a3 d + a4 d^2 = 0.75, entry (1,1) = a6 + a7 d = 0.5.
        let sys = fixtures::quadratic_dependence_example(&[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]);
        let ev = sys.eval_at_delta(&[0.5]).unwrap();
        assert_relative_eq!(ev.a[(0, 0)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(ev.a[(0, 1)], 0.75, epsilon = 1e-14);
        assert_relative_eq!(ev.a[(1, 0)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(ev.a[(1, 1)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn quadratic_term_comes_only_from_feedthrough() {
        // Zeroing D_G11 in the same structure must remove the delta^2 term.
        let coeffs = [0.1, 0.2, 1.0, 1.0, 0.3, 0.4, 1.0];
        let sys = fixtures::quadratic_dependence_example(&coeffs, &[0.0, 0.0]);
        let mut g = sys.partition().clone();
        g.d_g11 = DMatrix::zeros(2, 2);
        let flat = LftSystem::new(g, sys.uncertainty().clone()).unwrap();
        for &d in &[-0.9, -0.3, 0.4, 0.8] {
            let ev = flat.eval_at_delta(&[d]).unwrap();
            // Affine part only: a2 + a3 d in the (0,1) entry.
            assert_relative_eq!(ev.a[(0, 1)], coeffs[1] + coeffs[2] * d, epsilon = 1e-12);
        }
    }

    #[test]
    fn eval_rejects_inadmissible_delta() {
        let sys = fixtures::quadratic_dependence_example(&[0.0; 7], &[0.0, 0.0]);
        assert!(sys.eval_at_delta(&[1.5]).is_err());
    }

    #[test]
    fn affine_lift_scalar() {
        // x(k+1) = (0.5 + 0.1 delta) x(k): eval at delta = 1 gives 0.6.
        let family = AffineFamily {
            a: vec![
                DMatrix::from_row_slice(1, 1, &[0.5]),
                DMatrix::from_row_slice(1, 1, &[0.1]),
            ],
            b: vec![DMatrix::zeros(1, 0), DMatrix::zeros(1, 0)],
            c: vec![DMatrix::zeros(0, 1), DMatrix::zeros(0, 1)],
            d: vec![DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)],
        };
        let sys = affine_to_lft(&family, &[1.0]).unwrap();
        assert_eq!(sys.dims().n_theta, 1);
        assert!(sys.partition().d_g11.iter().all(|&v| v == 0.0));
        let ev = sys.eval_at_delta(&[1.0]).unwrap();
        assert_relative_eq!(ev.a[(0, 0)], 0.6, epsilon = 1e-14);
    }

    #[test]
    fn affine_lift_zero_coefficients_is_degenerate() {
        let family = AffineFamily {
            a: vec![DMatrix::identity(2, 2).scale(0.4), DMatrix::zeros(2, 2)],
            b: vec![DMatrix::zeros(2, 1), DMatrix::zeros(2, 1)],
            c: vec![DMatrix::identity(2, 2), DMatrix::zeros(2, 2)],
            d: vec![DMatrix::zeros(2, 1), DMatrix::zeros(2, 1)],
        };
        let sys = affine_to_lft(&family, &[1.0]).unwrap();
        assert_eq!(sys.dims().n_theta, 0);
        let ev = sys.eval_at_delta(&[0.3]).unwrap();
        assert_relative_eq!((ev.a - DMatrix::identity(2, 2).scale(0.4)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn spring_constant_lift() {
        // Stiffness term 0.075 + 0.025 delta with one copy.
        let family = AffineFamily {
            a: vec![
                DMatrix::from_row_slice(1, 1, &[0.075]),
                DMatrix::from_row_slice(1, 1, &[0.025]),
            ],
            b: vec![DMatrix::zeros(1, 0), DMatrix::zeros(1, 0)],
            c: vec![DMatrix::zeros(0, 1), DMatrix::zeros(0, 1)],
            d: vec![DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)],
        };
        let sys = affine_to_lft(&family, &[1.0]).unwrap();
        assert_eq!(sys.uncertainty().total_copies(), 1);
        let lo = sys.eval_at_delta(&[-1.0]).unwrap();
        assert_relative_eq!(lo.a[(0, 0)], 0.05, epsilon = 1e-15);
        let hi = sys.eval_at_delta(&[1.0]).unwrap();
        assert_relative_eq!(hi.a[(0, 0)], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn two_mass_stiffness_at_vertex() {
        let sys = fixtures::two_mass_plant();
        assert_eq!(sys.dims().n_g, 4);
        assert_eq!(sys.dims().n_theta, 1);
        // At delta = 1 the evaluated dynamics must equal the Euler map
        // built with k_s = 0.1.
        let ev = sys.eval_at_delta(&[1.0]).unwrap();
        let direct = fixtures::two_mass_euler_a(0.1);
        assert_relative_eq!((ev.a - direct).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn random_affine_round_trip() {
        let mut rng = crate::sim::rng::Rng::seed_from(2024);
        for _ in 0..100 {
            let n = 1 + rng.below(4);
            let n_d = rng.below(3);
            let n_y = rng.below(3);
            let m = 1 + rng.below(3);
            let rand_m = |rng: &mut crate::sim::rng::Rng, r: usize, c: usize| {
                DMatrix::from_fn(r, c, |_, _| rng.uniform_in(-1.0, 1.0))
            };
            let mut family = AffineFamily {
                a: vec![rand_m(&mut rng, n, n).scale(0.3)],
                b: vec![rand_m(&mut rng, n, n_d)],
                c: vec![rand_m(&mut rng, n_y, n)],
                d: vec![rand_m(&mut rng, n_y, n_d)],
            };
            for _ in 0..m {
                family.a.push(rand_m(&mut rng, n, n).scale(0.2));
                family.b.push(rand_m(&mut rng, n, n_d).scale(0.2));
                family.c.push(rand_m(&mut rng, n_y, n).scale(0.2));
                family.d.push(rand_m(&mut rng, n_y, n_d).scale(0.2));
            }
            let bounds = vec![1.0; m];
            let sys = affine_to_lft(&family, &bounds).unwrap();
            for _ in 0..5 {
                let delta: Vec<f64> = (0..m).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
                let ev = sys.eval_at_delta(&delta).unwrap();
                let (a, b, c, d) = family.eval(&delta).unwrap();
                assert!((ev.a - a).norm() <= 1e-10);
                assert!((ev.b - b).norm() <= 1e-10);
                assert!((ev.c - c).norm() <= 1e-10);
                assert!((ev.d - d).norm() <= 1e-10);
            }
        }
    }
}
