//! N point masses with pair-distance interactions: the Cartesian model,
//! the mass-weighted orthogonal relative-coordinate transform, and the
//! squared-distance representation of the relative motion.
//!
//! Coordinate naming is positional and 1-based throughout: body `i`'s
//! Cartesian coordinates are `x{i}_{a}` with axis `a = 1..d`, its momenta
//! `p{i}_{a}`. Pair quantities use the concatenated body indices with
//! `i < j`: the potential is written in distance symbols `r12, r13, ...`,
//! the squared-distance chart uses `rho12, rho13, ...` with conjugate
//! momenta `prho12, ...`. Body counts are capped at 9 so the two-digit pair
//! names stay unambiguous.
//!
//! The squared-distance kinetic energy, valid on the zero-angular-momentum
//! reduction when the spatial dimension exceeds `N − 2`, is
//!
//! ```text
//! T_ρ = 2 Σ_{i<j} (mᵢ+mⱼ)/(mᵢmⱼ) ρᵢⱼ p²ᵢⱼ
//!     + Σ_i Σ_{j<k, j≠i≠k} (2/mᵢ) (ρᵢⱼ + ρᵢₖ − ρⱼₖ) pᵢⱼ pᵢₖ
//! ```
//!
//! i.e. `T_ρ = pᵀ G(ρ) p` with the sparse symmetric matrix exposed by
//! [`rho_kinetic_matrix`]. Two momenta couple exactly when their pairs
//! share a body.

use nalgebra::DMatrix;

use super::{parse_internal, ModelError, SystemModel};
use crate::dynamics::Hamiltonian;
use crate::expr::{Binding, Expression};
use crate::poisson::Chart;

const MAX_BODIES: usize = 9;

fn validate_masses(n: usize, masses: &[f64]) -> Result<(), ModelError> {
    if masses.len() != n {
        return Err(ModelError::MassCountMismatch {
            expected: n,
            got: masses.len(),
        });
    }
    for &m in masses {
        if !(m.is_finite() && m > 0.0) {
            return Err(ModelError::NonPositiveMass(m));
        }
    }
    Ok(())
}

fn validate_body_count(n: usize, min: usize) -> Result<(), ModelError> {
    if n < min || n > MAX_BODIES {
        return Err(ModelError::UnsupportedBodyCount {
            n,
            min,
            max: MAX_BODIES,
        });
    }
    Ok(())
}

fn mass_constants(masses: &[f64]) -> Binding {
    masses
        .iter()
        .enumerate()
        .map(|(i, &m)| (format!("m{}", i + 1), m))
        .collect()
}

/// The Cartesian N-body system (id `HN`).
#[derive(Debug, Clone)]
pub struct NBody {
    pub model: SystemModel,
    pub bodies: usize,
    pub dim: usize,
    pub masses: Vec<f64>,
    /// The potential as given, in the pair-distance symbols `r{ij}`.
    pub potential: Expression,
}

impl NBody {
    pub fn coordinate_name(body: usize, axis: usize) -> String {
        format!("x{body}_{axis}")
    }

    pub fn momentum_name(body: usize, axis: usize) -> String {
        format!("p{body}_{axis}")
    }

    /// `(rho{ij}, Σ_a (x{i}_a − x{j}_a)²)` for every pair, in name order.
    /// Substituting these into a squared-distance expression moves it onto
    /// the Cartesian chart.
    pub fn rho_substitutions(&self) -> Vec<(String, Expression)> {
        pair_list(self.bodies)
            .into_iter()
            .map(|(i, j)| {
                (
                    format!("rho{i}{j}"),
                    parse_internal(&separation_squared(i, j, self.dim)),
                )
            })
            .collect()
    }
}

fn separation_squared(i: usize, j: usize, dim: usize) -> String {
    let terms: Vec<String> = (1..=dim)
        .map(|a| format!("(x{i}_{a} - x{j}_{a})^2"))
        .collect();
    terms.join(" + ")
}

/// Pairs `(i, j)` with `1 ≤ i < j ≤ n`, in the fixed name order.
pub(crate) fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in (i + 1)..=n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Squared-distance coordinate names `rho{ij}`, `i < j`, in the fixed order.
pub fn rho_names(n: usize) -> Vec<String> {
    pair_list(n)
        .into_iter()
        .map(|(i, j)| format!("rho{i}{j}"))
        .collect()
}

/// Build the Cartesian N-body system in `dim` spatial dimensions. The
/// potential must be written in the pair-distance symbols `r{ij}` (for a
/// single body it must be constant).
pub fn nbody_cartesian(
    bodies: usize,
    dim: usize,
    masses: &[f64],
    potential: &Expression,
) -> Result<NBody, ModelError> {
    validate_body_count(bodies, 1)?;
    if dim == 0 {
        return Err(ModelError::ZeroDimension);
    }
    validate_masses(bodies, masses)?;
    let allowed: Vec<String> = pair_list(bodies)
        .into_iter()
        .map(|(i, j)| format!("r{i}{j}"))
        .collect();
    for sym in potential.free_symbols() {
        if !allowed.iter().any(|a| a == sym) {
            return Err(ModelError::UnexpectedPotentialSymbol {
                expected: if allowed.is_empty() {
                    "no symbols (single body)".to_string()
                } else {
                    format!("pair distances {}", allowed.join(", "))
                },
                found: sym.clone(),
            });
        }
    }

    let mut q_names = Vec::with_capacity(bodies * dim);
    let mut p_names = Vec::with_capacity(bodies * dim);
    for i in 1..=bodies {
        for a in 1..=dim {
            q_names.push(NBody::coordinate_name(i, a));
            p_names.push(NBody::momentum_name(i, a));
        }
    }
    let chart = Chart::new(
        "cartesian-nbody",
        q_names,
        p_names,
        mass_constants(masses),
    )?;

    let kinetic_terms: Vec<String> = (1..=bodies)
        .map(|i| {
            let squares: Vec<String> = (1..=dim).map(|a| format!("p{i}_{a}^2")).collect();
            format!("({})/(2*m{i})", squares.join(" + "))
        })
        .collect();
    let kinetic = parse_internal(&kinetic_terms.join(" + "));

    let mut v_cartesian = potential.clone();
    for (i, j) in pair_list(bodies) {
        let dist = parse_internal(&format!("sqrt({})", separation_squared(i, j, dim)));
        v_cartesian = v_cartesian.substitute(&format!("r{i}{j}"), &dist);
    }

    // Total momentum per axis and angular momentum per axis pair.
    let mut observables = Vec::new();
    for a in 1..=dim {
        let sum: Vec<String> = (1..=bodies).map(|i| format!("p{i}_{a}")).collect();
        observables.push((format!("P_{a}"), parse_internal(&sum.join(" + "))));
    }
    for a in 1..=dim {
        for b in (a + 1)..=dim {
            let terms: Vec<String> = (1..=bodies)
                .map(|i| format!("x{i}_{a}*p{i}_{b} - x{i}_{b}*p{i}_{a}"))
                .collect();
            observables.push((format!("L_{a}_{b}"), parse_internal(&terms.join(" + "))));
        }
    }

    // Per-body sampling boxes staggered along the diagonal so random
    // samples keep the bodies separated.
    let mut sample_ranges = Vec::with_capacity(2 * bodies * dim);
    for i in 1..=bodies {
        let center = i as f64;
        for _ in 1..=dim {
            sample_ranges.push((center - 0.8, center - 0.2));
        }
    }
    sample_ranges.extend(std::iter::repeat((-1.0, 1.0)).take(bodies * dim));

    let model = SystemModel {
        id: "HN".to_string(),
        description: "N point masses with pair-distance interactions, Cartesian chart"
            .to_string(),
        chart,
        energy: Hamiltonian::split(kinetic, v_cartesian),
        observables,
        sample_ranges,
    };

    Ok(NBody {
        model,
        bodies,
        dim,
        masses: masses.to_vec(),
        potential: potential.clone(),
    })
}

// ---------------------------------------------------------------------------
// Mass-weighted relative coordinates
// ---------------------------------------------------------------------------

/// The orthogonal (in the mass metric) linear change of coordinates that
/// splits off the center of mass: row 0 is the scaled center of mass
/// `√M R`, row `k ≥ 1` is `√μ_k (r_k − com(r_0..r_{k−1}))` with
/// `μ_k = M_{k−1} m_k / M_k`. By construction `A M̂⁻¹ Aᵀ = I`, so the
/// kinetic form is an unweighted sum of squares in the new momenta.
#[derive(Debug, Clone)]
pub struct JacobiTransform {
    masses: Vec<f64>,
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
}

pub fn jacobi_transform(masses: &[f64]) -> Result<JacobiTransform, ModelError> {
    let n = masses.len();
    validate_body_count(n, 1)?;
    validate_masses(n, masses)?;

    let total: f64 = masses.iter().sum();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(0, i)] = masses[i] / total.sqrt();
    }
    let mut partial: f64 = masses[0];
    for k in 1..n {
        let mu = partial * masses[k] / (partial + masses[k]);
        let scale = mu.sqrt();
        for i in 0..k {
            a[(k, i)] = -scale * masses[i] / partial;
        }
        a[(k, k)] = scale;
        partial += masses[k];
    }

    // A M̂⁻¹ Aᵀ = I gives the inverse in closed form: A⁻¹ = M̂⁻¹ Aᵀ.
    let mut a_inv = a.transpose();
    for i in 0..n {
        for k in 0..n {
            a_inv[(i, k)] /= masses[i];
        }
    }

    Ok(JacobiTransform {
        masses: masses.to_vec(),
        a,
        a_inv,
    })
}

impl JacobiTransform {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Relative positions `ξ = A r`; `r` is `n × d`, one row per body.
    pub fn positions(&self, r: &DMatrix<f64>) -> DMatrix<f64> {
        &self.a * r
    }

    /// Conjugate momenta `π = A⁻ᵀ p`, the transform that keeps `Σ π·ξ̇`
    /// equal to `Σ p·ṙ`.
    pub fn momenta(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        self.a_inv.transpose() * p
    }

    pub fn inverse_positions(&self, xi: &DMatrix<f64>) -> DMatrix<f64> {
        &self.a_inv * xi
    }

    pub fn inverse_momenta(&self, pi: &DMatrix<f64>) -> DMatrix<f64> {
        self.a.transpose() * pi
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
}

// ---------------------------------------------------------------------------
// Squared-distance representation
// ---------------------------------------------------------------------------

/// The relative-motion kinetic energy in squared-distance variables, as an
/// expression over `rho{ij}`, `prho{ij}`, and symbolic masses `m1..mN`.
pub fn rho_hamiltonian(n: usize) -> Result<Expression, ModelError> {
    validate_body_count(n, 2)?;
    let mut terms: Vec<String> = pair_list(n)
        .into_iter()
        .map(|(i, j)| format!("2*(m{i}+m{j})/(m{i}*m{j})*rho{i}{j}*prho{i}{j}^2"))
        .collect();
    for i in 1..=n {
        let others: Vec<usize> = (1..=n).filter(|&b| b != i).collect();
        for (jj, &j) in others.iter().enumerate() {
            for &k in &others[jj + 1..] {
                let ij = pair_name(i, j);
                let ik = pair_name(i, k);
                let jk = pair_name(j, k);
                terms.push(format!(
                    "(2/m{i})*(rho{ij} + rho{ik} - rho{jk})*prho{ij}*prho{ik}"
                ));
            }
        }
    }
    Ok(parse_internal(&terms.join(" + ")))
}

fn pair_name(a: usize, b: usize) -> String {
    if a < b {
        format!("{a}{b}")
    } else {
        format!("{b}{a}")
    }
}

/// Index of pair `(i, j)` (1-based, either order) in the `rho_names` order.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    // Pairs with first index < i come first, then (i, i+1..j).
    (i - 1) * n - (i - 1) * i / 2 + (j - i - 1)
}

/// The symmetric matrix `G(ρ)` with `T_ρ = pᵀ G p`, evaluated at numeric
/// squared distances (ordered as `rho_names`). The momentum gradient of the
/// kinetic energy is `2 G p`.
pub fn rho_kinetic_matrix(
    n: usize,
    masses: &[f64],
    rho: &[f64],
) -> Result<DMatrix<f64>, ModelError> {
    validate_body_count(n, 2)?;
    validate_masses(n, masses)?;
    let npairs = n * (n - 1) / 2;
    if rho.len() != npairs {
        return Err(ModelError::LengthMismatch {
            expected: npairs,
            got: rho.len(),
        });
    }
    let mut g = DMatrix::zeros(npairs, npairs);
    for (i, j) in pair_list(n) {
        let a = pair_index(n, i, j);
        g[(a, a)] = 2.0 * (masses[i - 1] + masses[j - 1]) / (masses[i - 1] * masses[j - 1])
            * rho[a];
    }
    for c in 1..=n {
        let others: Vec<usize> = (1..=n).filter(|&b| b != c).collect();
        for (jj, &j) in others.iter().enumerate() {
            for &k in &others[jj + 1..] {
                let a = pair_index(n, c, j);
                let b = pair_index(n, c, k);
                let coupling = (rho[pair_index(n, c, j)] + rho[pair_index(n, c, k)]
                    - rho[pair_index(n, j, k)])
                    / masses[c - 1];
                g[(a, b)] = coupling;
                g[(b, a)] = coupling;
            }
        }
    }
    Ok(g)
}

/// Squared pair distances of a configuration (`n × d`, one row per body),
/// ordered as `rho_names`.
pub fn rho_from_positions(positions: &DMatrix<f64>) -> Vec<f64> {
    let n = positions.nrows();
    let d = positions.ncols();
    pair_list(n)
        .into_iter()
        .map(|(i, j)| {
            (0..d)
                .map(|a| {
                    let diff = positions[(i - 1, a)] - positions[(j - 1, a)];
                    diff * diff
                })
                .sum()
        })
        .collect()
}

/// The squared-distance system (id `HRNrho`): chart `rho{ij} | prho{ij}`
/// with mass constants, kinetic energy [`rho_hamiltonian`], and an optional
/// potential in the `rho{ij}` symbols.
pub fn rho_model(
    n: usize,
    masses: &[f64],
    potential: Option<&Expression>,
) -> Result<SystemModel, ModelError> {
    validate_body_count(n, 2)?;
    validate_masses(n, masses)?;
    let names = rho_names(n);
    if let Some(v) = potential {
        for sym in v.free_symbols() {
            if !names.iter().any(|a| a == sym) {
                return Err(ModelError::UnexpectedPotentialSymbol {
                    expected: format!("squared distances {}", names.join(", ")),
                    found: sym.clone(),
                });
            }
        }
    }
    let chart = Chart::new(
        "squared-distance",
        names.clone(),
        names.iter().map(|r| format!("p{r}")).collect(),
        mass_constants(masses),
    )?;
    let kinetic = rho_hamiltonian(n)?;
    let energy = match potential {
        Some(v) => Hamiltonian::full(kinetic.plus(v)),
        None => Hamiltonian::full(kinetic),
    };
    let npairs = n * (n - 1) / 2;
    let mut sample_ranges = vec![(0.8, 1.6); npairs];
    sample_ranges.extend(std::iter::repeat((-1.0, 1.0)).take(npairs));
    Ok(SystemModel {
        id: "HRNrho".to_string(),
        description:
            "N-body relative motion in squared-distance variables at zero total angular momentum"
                .to_string(),
        chart,
        energy,
        observables: Vec::new(),
        sample_ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegratorSpec};
    use crate::poisson::{poisson_bracket, PhasePoint};
    use crate::polyalg::poly_from_expression;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn test_coordinate_layout_and_names() {
        // [TRIVIAL] Bodies outer, axes inner; momenta mirror positions.
        let model = nbody_cartesian(2, 2, &[1.0, 1.0], &Expression::zero())
            .unwrap()
            .model;
        let names: Vec<&str> = model.chart.coord_names().collect();
        assert_eq!(
            names,
            ["x1_1", "x1_2", "x2_1", "x2_2", "p1_1", "p1_2", "p2_1", "p2_2"]
        );
        assert_eq!(rho_names(3), ["rho12", "rho13", "rho23"]);
        assert_eq!(rho_names(4), ["rho12", "rho13", "rho14", "rho23", "rho24", "rho34"]);
    }

    #[test]
    fn test_total_momentum_and_angular_momentum_commute_with_energy() {
        // [DERIVED] The potential depends on differences only, and pair
        // distances are rotation invariant, so every P_a and L_a_b has zero
        // bracket with the energy at any point.
        let v = parse_internal("-1/r12 - 1/r13 - 1/r23");
        let nb = nbody_cartesian(3, 3, &[1.0, 2.0, 3.0], &v).unwrap();
        let h = nb.model.energy_expression();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6e62_6f64);
        for _ in 0..20 {
            let coords: Vec<f64> = nb
                .model
                .sample_ranges
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            let x = PhasePoint::new(nb.model.chart.clone(), coords).unwrap();
            for (name, obs) in &nb.model.observables {
                let bracket = poisson_bracket(obs, h, &x).unwrap();
                assert!(
                    bracket.abs() <= 1e-12,
                    "{name} should be conserved, bracket = {bracket}"
                );
            }
        }
    }

    #[test]
    fn test_single_body_requires_constant_potential() {
        assert!(nbody_cartesian(1, 3, &[1.0], &Expression::zero()).is_ok());
        let err = nbody_cartesian(1, 3, &[1.0], &parse_internal("r12")).unwrap_err();
        assert!(matches!(err, ModelError::UnexpectedPotentialSymbol { .. }));
        let err = nbody_cartesian(2, 3, &[1.0], &Expression::zero()).unwrap_err();
        assert!(matches!(err, ModelError::MassCountMismatch { .. }));
    }

    #[test]
    fn test_two_equal_masses_relative_row() {
        // [DERIVED] For two unit masses the single relative coordinate is
        // (r2 − r1)/√2: μ_1 = 1/2, center-of-mass weight 1/1.
        let t = jacobi_transform(&[1.0, 1.0]).unwrap();
        let s = 0.5_f64.sqrt();
        assert!((t.matrix()[(1, 0)] + s).abs() < 1e-15);
        assert!((t.matrix()[(1, 1)] - s).abs() < 1e-15);
    }

    #[test]
    fn test_transform_round_trips_and_diagonalizes_kinetic_energy() {
        // [DERIVED] A M̂⁻¹ Aᵀ = I means the momenta transform turns
        // Σ |p_i|²/m_i into Σ |π_k|² with no cross terms, and the closed
        // form inverse really inverts.
        let masses = [1.0, 2.0, 3.0];
        let t = jacobi_transform(&masses).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a61_636f);
        for _ in 0..25 {
            let r = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let p = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let xi = t.positions(&r);
            let pi = t.momenta(&p);
            assert!((t.inverse_positions(&xi) - &r).amax() < 1e-13);
            assert!((t.inverse_momenta(&pi) - &p).amax() < 1e-13);
            let direct: f64 = (0..3)
                .map(|i| p.row(i).iter().map(|v| v * v).sum::<f64>() / masses[i])
                .sum();
            let transformed: f64 = pi.iter().map(|v| v * v).sum();
            assert!(
                (direct - transformed).abs() <= 1e-12 * (1.0 + direct.abs()),
                "kinetic form changed: {direct} vs {transformed}"
            );
        }
    }

    #[test]
    fn test_two_body_squared_distance_energy() {
        // [PAPER] Two bodies: T = 2 (m1+m2)/(m1 m2) ρ12 p². At unit masses,
        // ρ12 = 1, p = 1 this is 4.
        let t = rho_hamiltonian(2).unwrap();
        let expected = poly_from_expression(&parse_internal(
            "2*(m1+m2)/(m1*m2)*rho12*prho12^2",
        ))
        .unwrap();
        assert_eq!(poly_from_expression(&t).unwrap(), expected);
        let b = Binding::new()
            .with("m1", 1.0)
            .with("m2", 1.0)
            .with("rho12", 1.0)
            .with("prho12", 1.0);
        assert_eq!(t.eval(&b).unwrap(), 4.0);
    }

    #[test]
    fn test_three_body_squared_distance_energy_matches_transcription() {
        // [PAPER] Frozen three-body form: three diagonal terms and one
        // cross term per body.
        let expected = poly_from_expression(&parse_internal(
            "2*(m1+m2)/(m1*m2)*rho12*prho12^2 \
             + 2*(m1+m3)/(m1*m3)*rho13*prho13^2 \
             + 2*(m2+m3)/(m2*m3)*rho23*prho23^2 \
             + (2/m1)*(rho12 + rho13 - rho23)*prho12*prho13 \
             + (2/m2)*(rho12 + rho23 - rho13)*prho12*prho23 \
             + (2/m3)*(rho13 + rho23 - rho12)*prho13*prho23",
        ))
        .unwrap();
        let got = poly_from_expression(&rho_hamiltonian(3).unwrap()).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn test_four_body_squared_distance_energy_matches_transcription() {
        // [PAPER] Frozen four-body form: six diagonal terms plus three
        // cross terms per body, with 1/m_ij = (m_i + m_j)/(m_i m_j) written
        // out. 18 kinetic terms in total.
        let expected = poly_from_expression(&parse_internal(
            "2*( (m1+m2)/(m1*m2)*rho12*prho12^2 \
               + (m1+m3)/(m1*m3)*rho13*prho13^2 \
               + (m1+m4)/(m1*m4)*rho14*prho14^2 \
               + (m2+m3)/(m2*m3)*rho23*prho23^2 \
               + (m2+m4)/(m2*m4)*rho24*prho24^2 \
               + (m3+m4)/(m3*m4)*rho34*prho34^2 \
               + (1/m1)*(rho12 + rho13 - rho23)*prho12*prho13 \
               + (1/m1)*(rho12 + rho14 - rho24)*prho12*prho14 \
               + (1/m1)*(rho13 + rho14 - rho34)*prho13*prho14 \
               + (1/m2)*(rho12 + rho23 - rho13)*prho12*prho23 \
               + (1/m2)*(rho12 + rho24 - rho14)*prho12*prho24 \
               + (1/m2)*(rho23 + rho24 - rho34)*prho23*prho24 \
               + (1/m3)*(rho13 + rho23 - rho12)*prho13*prho23 \
               + (1/m3)*(rho13 + rho34 - rho14)*prho13*prho34 \
               + (1/m3)*(rho23 + rho34 - rho24)*prho23*prho34 \
               + (1/m4)*(rho14 + rho24 - rho12)*prho14*prho24 \
               + (1/m4)*(rho14 + rho34 - rho13)*prho14*prho34 \
               + (1/m4)*(rho24 + rho34 - rho23)*prho24*prho34 )",
        ))
        .unwrap();
        let got = poly_from_expression(&rho_hamiltonian(4).unwrap()).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn test_kinetic_matrix_matches_momentum_gradient() {
        // [DERIVED] ∂T/∂p = 2 G p: compare the sparse matrix against dual
        // differentiation of the expression at random points.
        let n = 4;
        let masses = [1.0, 2.0, 3.0, 4.0];
        let t = rho_hamiltonian(n).unwrap();
        let names = rho_names(n);
        let p_names: Vec<String> = names.iter().map(|r| format!("p{r}")).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0x726b_696e);
        for _ in 0..25 {
            let rho: Vec<f64> = (0..6).map(|_| rng.gen_range(0.5..2.0)).collect();
            let p: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut binding = mass_constants(&masses);
            for (name, v) in names.iter().zip(&rho) {
                binding.insert(name, *v);
            }
            for (name, v) in p_names.iter().zip(&p) {
                binding.insert(name, *v);
            }
            let grad = t.grad(&binding, &p_names).unwrap();
            let g = rho_kinetic_matrix(n, &masses, &rho).unwrap();
            let p_vec = nalgebra::DVector::from_column_slice(&p);
            let expected = 2.0 * &g * &p_vec;
            for (a, b) in grad.iter().zip(expected.iter()) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn test_pair_index_is_name_order() {
        // [TRIVIAL] pair_index agrees with the rho_names ordering either
        // way around.
        for n in 2..=6 {
            let names = rho_names(n);
            for (i, j) in pair_list(n) {
                assert_eq!(names[pair_index(n, i, j)], format!("rho{i}{j}"));
                assert_eq!(names[pair_index(n, j, i)], format!("rho{i}{j}"));
            }
        }
    }

    #[test]
    fn test_zero_angular_momentum_survives_a_bounce() {
        // [DERIVED] Angular momentum is a quadratic invariant, which the
        // midpoint rule conserves to solver tolerance; a head-on two-body
        // encounter against a repulsive core keeps L = 0 and P = 0 for the
        // whole run.
        let v = parse_internal("r12^2 + 1/r12^2");
        let nb = nbody_cartesian(2, 2, &[1.0, 1.0], &v).unwrap();
        let x0 = PhasePoint::new(
            nb.model.chart.clone(),
            vec![-1.0, 0.0, 1.0, 0.0, 0.3, 0.0, -0.3, 0.0],
        )
        .unwrap();
        let spec = IntegratorSpec::midpoint(1e-3, 2000);
        let result = integrate(&nb.model.energy, &x0, &spec, &nb.model.observables).unwrap();
        assert!(result.error.is_none(), "run failed: {:?}", result.error);
        let traj = result.trajectory;
        for name in ["L_1_2", "P_1", "P_2"] {
            let series = traj.observable(name).unwrap();
            let worst = series.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(worst <= 1e-9, "{name} drifted to {worst}");
        }
    }

    #[test]
    fn test_rho_model_validates_potential_symbols() {
        let bad = parse_internal("rho12 + r13");
        assert!(matches!(
            rho_model(3, &[1.0, 1.0, 1.0], Some(&bad)),
            Err(ModelError::UnexpectedPotentialSymbol { .. })
        ));
        let good = parse_internal("rho12 + rho13 + rho23");
        assert!(rho_model(3, &[1.0, 1.0, 1.0], Some(&good)).is_ok());
    }
}
