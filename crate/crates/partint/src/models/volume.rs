//! Simplex-content ("volume") variables for equal-mass relative motion.
//!
//! For `n` unit-mass bodies, define for each `k = 1 .. n−1`
//!
//! ```text
//! V_k = Σ over (k+1)-point subsets of the squared k-dimensional content
//!       of the simplex those points span
//! ```
//!
//! so `V_1` is the sum of squared pair distances, `V_2` the sum of squared
//! triangle areas, `V_3` the sum of squared tetrahedron volumes, and so on.
//! Each squared content is a polynomial in the squared distances ρ_ij via
//! the bordered determinant
//!
//! ```text
//! content²(s_0..s_k) = (−1)^{k+1} / (2^k (k!)²) ·
//!     det [ 0  1        1        ...  1
//!           1  0        ρ_{01}   ...  ρ_{0k}
//!           1  ρ_{01}   0        ...  ρ_{1k}
//!           ⋮                         ⋮
//!           1  ρ_{0k}   ρ_{1k}   ...  0      ]
//! ```
//!
//! This module builds those polynomials exactly (rational arithmetic, one
//! shared determinant routine) and exposes evaluation in both exact and
//! double precision, the Jacobian ∂V_k/∂ρ_ij from exact polynomial
//! derivatives, and the volume-variable kinetic energies `T(V, P)` for
//! `n = 2 .. 6`. The defining property, tested here and relied on by the
//! cross-representation checks, is the chain rule identity
//!
//! ```text
//! T_vol(V(ρ), P) = T_ρ(ρ, JᵀP),   J_km = ∂V_k/∂ρ_m,
//! ```
//!
//! valid at squared distances realized by an actual point configuration.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;

use super::nbody::rho_names;
use super::{parse_internal, ModelError, SystemModel};
use crate::dynamics::Hamiltonian;
use crate::expr::{Binding, Expression};
use crate::poisson::Chart;
use crate::polyalg::SparsePoly;

const MIN_BODIES: usize = 2;
const MAX_BODIES: usize = 6;

/// The volume variables of an `n`-body configuration: exact polynomials
/// `V_1 .. V_{n−1}` in the squared distances, plus their derivatives.
#[derive(Debug, Clone)]
pub struct VolumeSystem {
    n: usize,
    rho_names: Vec<String>,
    /// `polys[k]` is `V_{k+1}`.
    polys: Vec<SparsePoly>,
    /// `jacobians[k][m]` is `∂V_{k+1}/∂ρ_m` (columns in `rho_names` order).
    jacobians: Vec<Vec<SparsePoly>>,
}

pub fn volume_system(n: usize) -> Result<VolumeSystem, ModelError> {
    if n < MIN_BODIES || n > MAX_BODIES {
        return Err(ModelError::UnsupportedBodyCount {
            n,
            min: MIN_BODIES,
            max: MAX_BODIES,
        });
    }
    let names = rho_names(n);
    let mut polys = Vec::with_capacity(n - 1);
    for k in 1..n {
        let mut sum = SparsePoly::zero();
        for subset in subsets(n, k + 1) {
            sum = &sum + &cayley_menger_det(&subset);
        }
        // (−1)^{k+1} / (2^k (k!)²), shared by every subset of this size.
        let sign: i64 = if (k + 1) % 2 == 0 { 1 } else { -1 };
        let factorial: i64 = (1..=k as i64).product();
        let denom = (1_i64 << k) * factorial * factorial;
        polys.push(&SparsePoly::ratio(sign, denom) * &sum);
    }
    let jacobians = polys
        .iter()
        .map(|p| names.iter().map(|v| p.partial(v)).collect())
        .collect();
    Ok(VolumeSystem {
        n,
        rho_names: names,
        polys,
        jacobians,
    })
}

/// Ascending `size`-element subsets of `1..=n`, in lexicographic order.
fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for v in start..=n {
            if n - v + 1 < size - current.len() {
                break;
            }
            current.push(v);
            rec(v + 1, n, size, current, out);
            current.pop();
        }
    }
    rec(1, n, size, &mut current, &mut out);
    out
}

/// The bordered squared-distance determinant of a point subset, as an
/// exact polynomial in that subset's ρ variables.
fn cayley_menger_det(subset: &[usize]) -> SparsePoly {
    let m = subset.len() + 1;
    let one = SparsePoly::int(1);
    let zero = SparsePoly::zero();
    let mut entries: Vec<Vec<SparsePoly>> = vec![vec![zero; m]; m];
    for i in 1..m {
        entries[0][i] = one.clone();
        entries[i][0] = one.clone();
        for j in 1..m {
            if i != j {
                let (a, b) = (subset[i - 1], subset[j - 1]);
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                entries[i][j] = SparsePoly::variable(&format!("rho{a}{b}"));
            }
        }
    }
    determinant(&entries)
}

/// Determinant of a small matrix of polynomials by cofactor expansion,
/// memoized on the remaining-column mask (each mask determines the row).
fn determinant(entries: &[Vec<SparsePoly>]) -> SparsePoly {
    fn rec(entries: &[Vec<SparsePoly>], mask: u32, memo: &mut HashMap<u32, SparsePoly>) -> SparsePoly {
        if mask == 0 {
            return SparsePoly::int(1);
        }
        if let Some(hit) = memo.get(&mask) {
            return hit.clone();
        }
        let m = entries.len();
        let row = m - mask.count_ones() as usize;
        let mut acc = SparsePoly::zero();
        let mut position = 0;
        for col in 0..m {
            if mask & (1 << col) == 0 {
                continue;
            }
            let e = &entries[row][col];
            if !e.is_zero() {
                let minor = rec(entries, mask & !(1 << col), memo);
                let term = e * &minor;
                acc = if position % 2 == 0 {
                    &acc + &term
                } else {
                    &acc - &term
                };
            }
            position += 1;
        }
        memo.insert(mask, acc.clone());
        acc
    }
    let m = entries.len();
    let mut memo = HashMap::new();
    rec(entries, (1u32 << m) - 1, &mut memo)
}

impl VolumeSystem {
    pub fn body_count(&self) -> usize {
        self.n
    }

    /// Number of volume variables, `n − 1`.
    pub fn var_count(&self) -> usize {
        self.n - 1
    }

    pub fn rho_names(&self) -> &[String] {
        &self.rho_names
    }

    /// `V_1 .. V_{n−1}` as exact polynomials in the ρ variables.
    pub fn polys(&self) -> &[SparsePoly] {
        &self.polys
    }

    fn check_rho_len(&self, got: usize) -> Result<(), ModelError> {
        let expected = self.rho_names.len();
        if got != expected {
            return Err(ModelError::LengthMismatch { expected, got });
        }
        Ok(())
    }

    /// Evaluate `V_1 .. V_{n−1}` at numeric squared distances (ordered as
    /// [`rho_names`](Self::rho_names)).
    pub fn values(&self, rho: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_rho_len(rho.len())?;
        let binding: Binding = self
            .rho_names
            .iter()
            .zip(rho)
            .map(|(n, &v)| (n.clone(), v))
            .collect();
        Ok(self
            .polys
            .iter()
            .map(|p| {
                p.eval_f64(&binding)
                    .expect("volume polynomials bind every rho variable")
            })
            .collect())
    }

    /// Exact evaluation at rational squared distances.
    pub fn values_exact(&self, rho: &[BigRational]) -> Result<Vec<BigRational>, ModelError> {
        self.check_rho_len(rho.len())?;
        let values: std::collections::BTreeMap<String, BigRational> = self
            .rho_names
            .iter()
            .zip(rho)
            .map(|(n, v)| (n.clone(), v.clone()))
            .collect();
        Ok(self
            .polys
            .iter()
            .map(|p| {
                p.eval_exact(&values)
                    .expect("volume polynomials bind every rho variable")
            })
            .collect())
    }

    /// The Jacobian `∂V_k/∂ρ_m` as an `(n−1) × (n(n−1)/2)` matrix.
    pub fn jacobian(&self, rho: &[f64]) -> Result<DMatrix<f64>, ModelError> {
        self.check_rho_len(rho.len())?;
        let binding: Binding = self
            .rho_names
            .iter()
            .zip(rho)
            .map(|(n, &v)| (n.clone(), v))
            .collect();
        Ok(DMatrix::from_fn(
            self.polys.len(),
            self.rho_names.len(),
            |k, m| {
                self.jacobians[k][m]
                    .eval_f64(&binding)
                    .expect("volume derivatives bind every rho variable")
            },
        ))
    }

    /// Pull volume-chart momenta back to squared-distance momenta:
    /// `p_ρ = Jᵀ P`. This is the substitution under which the two kinetic
    /// energies agree at realizable configurations.
    pub fn reduced_momenta(&self, rho: &[f64], vol_p: &[f64]) -> Result<Vec<f64>, ModelError> {
        if vol_p.len() != self.var_count() {
            return Err(ModelError::LengthMismatch {
                expected: self.var_count(),
                got: vol_p.len(),
            });
        }
        let jac = self.jacobian(rho)?;
        let p = DVector::from_column_slice(vol_p);
        Ok((jac.transpose() * p).iter().copied().collect())
    }
}

/// The volume-variable kinetic energy `T(V_1.., P_1..)` for `n = 2 ..= 6`
/// unit-mass bodies. Callers append a potential in the `V_k` symbols.
pub fn vol_hamiltonian(n: usize) -> Result<Expression, ModelError> {
    let src = match n {
        2 => "4*V1*P1^2",
        3 => "6*V1*P1^2 + (1/2)*V1*V2*P2^2 + 24*V2*P1*P2",
        4 => {
            "8*V1*P1^2 + (1/2)*(V1*V2 + 108*V3)*P2^2 + (2/9)*V2*V3*P3^2 \
             + 32*V2*P1*P2 + 48*V3*P1*P3 + 2*V1*V3*P2*P3"
        }
        5 => {
            "10*V1*P1^2 + (1/2)*(V1*V2 + 135*V3)*P2^2 \
             + (2/9)*(V2*V3 + 12*V1*V4)*P3^2 + (1/8)*V3*V4*P4^2 \
             + 40*V2*P1*P2 + 60*V3*P1*P3 + 80*V4*P1*P4 \
             + 2*(V1*V3 + 160*V4)*P2*P3 + 3*V1*V4*P2*P4 + (8/9)*V2*V4*P3*P4"
        }
        6 => {
            "12*V1*P1^2 + ((1/2)*V1*V2 + 81*V3)*P2^2 \
             + ((2/9)*V2*V3 + (8/3)*V1*V4 + (2000/3)*V5)*P3^2 \
             + ((1/8)*V3*V4 + (25/24)*V2*V5)*P4^2 + (2/25)*V4*V5*P5^2 \
             + 48*V2*P1*P2 + 72*V3*P1*P3 + 96*V4*P1*P4 + 120*V5*P1*P5 \
             + 2*(V1*V3 + 192*V4)*P2*P3 + (3*V1*V4 + 750*V5)*P2*P4 \
             + 4*V1*V5*P2*P5 + ((8/9)*V2*V4 + (100/9)*V1*V5)*P3*P4 \
             + (4/3)*V2*V5*P3*P5 + (1/2)*V3*V5*P4*P5"
        }
        _ => {
            return Err(ModelError::UnsupportedBodyCount {
                n,
                min: MIN_BODIES,
                max: MAX_BODIES,
            })
        }
    };
    Ok(parse_internal(src))
}

/// The volume-variable system (id `vol-N{n}`): chart `V_k | P_k`, kinetic
/// energy [`vol_hamiltonian`], optional potential in the `V_k` symbols.
pub fn vol_model(n: usize) -> Result<SystemModel, ModelError> {
    vol_model_with_potential(n, None)
}

pub fn vol_model_with_potential(
    n: usize,
    potential: Option<&Expression>,
) -> Result<SystemModel, ModelError> {
    let kinetic = vol_hamiltonian(n)?;
    let v_names: Vec<String> = (1..n).map(|k| format!("V{k}")).collect();
    if let Some(v) = potential {
        for sym in v.free_symbols() {
            if !v_names.iter().any(|a| a == sym) {
                return Err(ModelError::UnexpectedPotentialSymbol {
                    expected: format!("volume variables {}", v_names.join(", ")),
                    found: sym.clone(),
                });
            }
        }
    }
    let chart = Chart::new(
        "simplex-content",
        v_names,
        (1..n).map(|k| format!("P{k}")).collect(),
        Binding::new(),
    )?;
    let energy = match potential {
        Some(v) => Hamiltonian::full(kinetic.plus(v)),
        None => Hamiltonian::full(kinetic),
    };
    // Realistic magnitudes fall off quickly with k (areas², volumes², ...),
    // so each variable gets its own decade.
    let scales = [(1.0, 4.0), (0.05, 0.5), (0.005, 0.05), (5e-4, 5e-3), (5e-5, 5e-4)];
    let mut sample_ranges: Vec<(f64, f64)> = scales[..n - 1].to_vec();
    sample_ranges.extend(std::iter::repeat((-1.0, 1.0)).take(n - 1));
    Ok(SystemModel {
        id: format!("vol-N{n}"),
        description: format!(
            "{n}-body relative motion in simplex-content variables, unit masses"
        ),
        chart,
        energy,
        observables: Vec::new(),
        sample_ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::super::nbody::{rho_from_positions, rho_hamiltonian};
    use super::*;
    use crate::polyalg::poly_from_expression;
    use num_bigint::BigInt;
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn test_equilateral_triangle_contents() {
        // [DERIVED] Unit equilateral triangle: V1 = 3, and the squared area
        // is (√3/4)² = 3/16.
        let sys = volume_system(3).unwrap();
        let ones = vec![BigRational::one(); 3];
        let v = sys.values_exact(&ones).unwrap();
        assert_eq!(v[0], rat(3, 1));
        assert_eq!(v[1], rat(3, 16));
    }

    #[test]
    fn test_regular_tetrahedron_contents() {
        // [DERIVED] Unit regular tetrahedron: V1 = 6 edges, V2 = 4 faces of
        // squared area 3/16, and squared volume (√2/12)² = 1/72.
        let sys = volume_system(4).unwrap();
        let ones = vec![BigRational::one(); 6];
        let v = sys.values_exact(&ones).unwrap();
        assert_eq!(v[0], rat(6, 1));
        assert_eq!(v[1], rat(3, 4));
        assert_eq!(v[2], rat(1, 72));
    }

    #[test]
    fn test_collinear_triangle_has_zero_area() {
        // [TRIVIAL] Three collinear points (squared distances 1, 4, 1 along
        // a line) span no area.
        let sys = volume_system(3).unwrap();
        let rho = vec![rat(1, 1), rat(4, 1), rat(1, 1)];
        let v = sys.values_exact(&rho).unwrap();
        assert!(v[1].is_zero(), "collinear area² = {}", v[1]);
    }

    #[test]
    fn test_three_body_area_polynomial_matches_transcription() {
        // [PAPER] Frozen squared-area form for one triangle.
        let sys = volume_system(3).unwrap();
        let expected = poly_from_expression(&parse_internal(
            "(1/16)*(2*rho12*rho23 + 2*rho12*rho13 + 2*rho23*rho13 \
             - rho12^2 - rho23^2 - rho13^2)",
        ))
        .unwrap();
        assert_eq!(sys.polys()[1], expected);
        // V1 is always the plain sum of squared distances.
        let v1 = poly_from_expression(&parse_internal("rho12 + rho13 + rho23")).unwrap();
        assert_eq!(sys.polys()[0], v1);
    }

    fn triangle_area_squared(a: &str, b: &str, c: &str) -> String {
        // Squared area of a triangle from its three squared side lengths
        // (symmetric in the three names).
        format!(
            "(1/16)*(2*{a}*{b} + 2*{a}*{c} + 2*{b}*{c} - {a}^2 - {b}^2 - {c}^2)"
        )
    }

    #[test]
    fn test_four_body_area_and_volume_polynomials_match_transcription() {
        // [PAPER] Frozen four-body forms: V2 sums the four facet areas;
        // V3 is the 22-term squared-volume polynomial.
        let sys = volume_system(4).unwrap();
        let v2_src = format!(
            "{} + {} + {} + {}",
            triangle_area_squared("rho12", "rho13", "rho23"),
            triangle_area_squared("rho12", "rho14", "rho24"),
            triangle_area_squared("rho13", "rho14", "rho34"),
            triangle_area_squared("rho23", "rho24", "rho34"),
        );
        let v2 = poly_from_expression(&parse_internal(&v2_src)).unwrap();
        assert_eq!(sys.polys()[1], v2);

        let v3 = poly_from_expression(&parse_internal(
            "(1/144)*( rho23*rho34*rho12 + rho24*rho34*rho12 + rho14*rho23*rho12 \
             + rho13*rho24*rho12 + rho13*rho34*rho12 + rho14*rho34*rho12 \
             + rho13*rho14*rho23 + rho13*rho14*rho24 + rho13*rho23*rho24 \
             + rho14*rho23*rho24 + rho14*rho23*rho34 + rho13*rho24*rho34 \
             - rho14*rho23^2 - rho13*rho24^2 - rho14^2*rho23 - rho34*rho12^2 \
             - rho34^2*rho12 - rho13^2*rho24 - rho13*rho14*rho34 \
             - rho23*rho24*rho34 - rho13*rho23*rho12 - rho14*rho24*rho12 )",
        ))
        .unwrap();
        assert_eq!(sys.polys()[2], v3);
    }

    #[test]
    fn test_contents_match_gram_determinant_oracle() {
        // [DERIVED] Independent float route: content² of a simplex is
        // det(E Eᵀ)/(k!)² with E the edge matrix from its first vertex.
        // Summed over subsets this must equal the polynomial evaluation.
        let n = 4;
        let sys = volume_system(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6772_616d);
        for _ in 0..20 {
            let pos = DMatrix::from_fn(n, 3, |_, _| rng.gen_range(-1.0..1.0));
            let rho = rho_from_positions(&pos);
            let values = sys.values(&rho).unwrap();
            for k in 1..n {
                let mut oracle = 0.0;
                for subset in subsets(n, k + 1) {
                    let mut edges = DMatrix::zeros(k, 3);
                    for (row, &body) in subset[1..].iter().enumerate() {
                        for a in 0..3 {
                            edges[(row, a)] = pos[(body - 1, a)] - pos[(subset[0] - 1, a)];
                        }
                    }
                    let gram = &edges * edges.transpose();
                    let factorial: f64 = (1..=k).map(|x| x as f64).product();
                    oracle += gram.determinant() / (factorial * factorial);
                }
                let got = values[k - 1];
                assert!(
                    (got - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()),
                    "V_{k}: polynomial {got} vs Gram oracle {oracle}"
                );
            }
        }
    }

    #[test]
    fn test_volume_energy_at_equilateral_rest_point() {
        // [DERIVED] n = 3 at V1 = 3, V2 = 3/16, P = (1, 0):
        // 6·3·1² + 0 + 0 = 18.
        let t = vol_hamiltonian(3).unwrap();
        let b = Binding::new()
            .with("V1", 3.0)
            .with("V2", 3.0 / 16.0)
            .with("P1", 1.0)
            .with("P2", 0.0);
        assert_eq!(t.eval(&b).unwrap(), 18.0);
    }

    #[test]
    fn test_two_body_volume_energy_is_renamed_squared_distance_energy() {
        // [DERIVED] With one pair, V1 = ρ12 and the two representations
        // coincide under renaming at unit masses.
        let rho = rho_hamiltonian(2)
            .unwrap()
            .substitute("m1", &Expression::integer(1))
            .substitute("m2", &Expression::integer(1));
        let renamed = poly_from_expression(&rho)
            .unwrap()
            .rename_variable("rho12", "V1")
            .rename_variable("prho12", "P1");
        let vol = poly_from_expression(&vol_hamiltonian(2).unwrap()).unwrap();
        assert_eq!(renamed, vol);
    }

    #[test]
    fn test_chain_rule_identity_for_three_bodies() {
        // [DERIVED] The change of variables P ↦ p_ρ = JᵀP matches the two
        // kinetic energies at realizable configurations:
        // T_vol(V(ρ), P) = T_ρ(ρ, JᵀP).
        let n = 3;
        let sys = volume_system(n).unwrap();
        let t_vol = vol_hamiltonian(n).unwrap();
        let t_rho = rho_hamiltonian(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6368_6169);
        for _ in 0..50 {
            let pos = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
            let rho = rho_from_positions(&pos);
            let vol_p: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let values = sys.values(&rho).unwrap();
            let p_rho = sys.reduced_momenta(&rho, &vol_p).unwrap();

            let mut vb = Binding::new();
            for (k, v) in values.iter().enumerate() {
                vb.insert(&format!("V{}", k + 1), *v);
                vb.insert(&format!("P{}", k + 1), vol_p[k]);
            }
            let lhs = t_vol.eval(&vb).unwrap();

            let mut rb = Binding::new();
            for i in 1..=n {
                rb.insert(&format!("m{i}"), 1.0);
            }
            for (name, v) in sys.rho_names().iter().zip(&rho) {
                rb.insert(name, *v);
            }
            for (name, v) in sys.rho_names().iter().zip(&p_rho) {
                rb.insert(&format!("p{name}"), *v);
            }
            let rhs = t_rho.eval(&rb).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()),
                "kinetic energies disagree: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn test_contents_of_real_configurations_are_nonnegative() {
        // [DERIVED] Squared contents of real point sets cannot be negative.
        let n = 5;
        let sys = volume_system(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x706f_7369);
        for _ in 0..10 {
            let pos = DMatrix::from_fn(n, 4, |_, _| rng.gen_range(-1.0..1.0));
            let rho = rho_from_positions(&pos);
            for (k, v) in sys.values(&rho).unwrap().into_iter().enumerate() {
                assert!(v >= -1e-12, "V_{} = {v} negative", k + 1);
            }
        }
    }

    #[test]
    fn test_body_count_limits() {
        assert!(matches!(
            volume_system(7),
            Err(ModelError::UnsupportedBodyCount { .. })
        ));
        assert!(matches!(
            vol_hamiltonian(1),
            Err(ModelError::UnsupportedBodyCount { .. })
        ));
        for n in 2..=6 {
            volume_system(n).unwrap();
            vol_hamiltonian(n).unwrap();
        }
    }
}
