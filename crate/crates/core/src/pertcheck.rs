//! Checks of the perturbative origin of the model: the census of virtual
//! routes behind the sixth-order hexagon term, and exact diagonalization of
//! the three-body gadget.

use crate::noise::plaquette_energy;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_rational::Ratio;
use std::collections::BTreeMap;

/// Intermediate total energies, in units of Δ, after steps 1 to 5.
pub type Route = [u8; 5];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteCensus {
    pub routes: BTreeMap<Route, u32>,
    /// `Σ multiplicity / Π intermediate energies`.
    pub q: Ratio<i64>,
}

impl RouteCensus {
    pub fn total(&self) -> u32 {
        self.routes.values().sum()
    }

    pub fn multiplicity(&self, route: &Route) -> u32 {
        self.routes.get(route).copied().unwrap_or(0)
    }
}

/// Hexagon vertex `v` carries `X` for even `v` and `X†` for odd `v`; it is
/// shared by triangles `v` and `v+1 mod 6` and shifts both charges by its
/// sign, so the full product leaves every triangle neutral.
fn apply_factor(charges: &mut [u8; 6], v: usize) {
    let shift = if v % 2 == 0 { 1 } else { 3 };
    charges[v] = (charges[v] + shift) & 3;
    charges[(v + 1) % 6] = (charges[(v + 1) % 6] + shift) & 3;
}

fn energy(charges: &[u8; 6]) -> u8 {
    charges.iter().map(|&k| plaquette_energy(k)).sum()
}

/// Heap's algorithm over the orderings of the six hexagon factors.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut out = vec![a.clone()];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Energy route of one ordering; errors if the ordering does not return to
/// the ground state.
pub fn route_of(order: &[usize]) -> Result<Route> {
    let mut charges = [0u8; 6];
    let mut route = [0u8; 5];
    for (step, &v) in order.iter().enumerate() {
        apply_factor(&mut charges, v);
        if step < 5 {
            route[step] = energy(&charges);
        }
    }
    if energy(&charges) != 0 {
        return Err(Error::InvalidArgument(format!("ordering {order:?} does not return to the ground state")));
    }
    Ok(route)
}

pub fn enumerate_routes() -> Result<RouteCensus> {
    let mut routes = BTreeMap::new();
    for order in permutations(6) {
        *routes.entry(route_of(&order)?).or_insert(0u32) += 1;
    }
    let q = routes.iter().fold(Ratio::from_integer(0i64), |acc, (r, &m)| {
        let denom: i64 = r.iter().map(|&e| e as i64).product();
        acc + Ratio::new(m as i64, denom)
    });
    Ok(RouteCensus { routes, q })
}

/// Coefficients of the low-energy spectrum of the gadget expanded in
/// products of `σᶻ_a, σᶻ_b, σᶻ_c`, in units of Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct GadgetFit {
    pub constant: f64,
    pub z_a: f64,
    pub z_b: f64,
    pub z_c: f64,
    pub z_ab: f64,
    pub z_ac: f64,
    pub z_bc: f64,
    pub z_abc: f64,
    /// `−4α²β/Δ²`.
    pub predicted_abc: f64,
    /// Scale of the cancelled two-body term, `2α²/Δ`.
    pub two_body_scale: f64,
    /// Scale of the cancelled one-body term, `β`.
    pub one_body_scale: f64,
}

impl GadgetFit {
    pub fn relative_error_abc(&self) -> f64 {
        ((self.z_abc - self.predicted_abc) / self.predicted_abc).abs()
    }

    /// Largest one-body residual relative to β.
    pub fn one_body_residual(&self) -> f64 {
        [self.z_a, self.z_b, self.z_c].iter().map(|v| v.abs()).fold(0.0, f64::max) / self.one_body_scale
    }

    /// Largest two-body residual relative to `2α²/Δ`.
    pub fn two_body_residual(&self) -> f64 {
        [self.z_ab, self.z_ac, self.z_bc].iter().map(|v| v.abs()).fold(0.0, f64::max) / self.two_body_scale
    }
}

/// Minimum ratio Δ / max(α, β) accepted by [`gadget_check`].
pub const MIN_GAP_RATIO: f64 = 50.0;

fn kron_all(ops: &[&DMatrix<f64>]) -> DMatrix<f64> {
    ops.iter().skip(1).fold(ops[0].clone(), |acc, m| acc.kronecker(m))
}

/// Diagonalizes `−Δ/2 σᶻ_u + α(σᶻ_a+σᶻ_b)σˣ_u + βσᶻ_cσᶻ_u + γσᶻ_aσᶻ_b + δσᶻ_c`
/// with `γ = 2α²/Δ`, `δ = −β` on qubits `(a, b, c, u)`, keeps the eight
/// lowest levels and fits them over the `σᶻ` labels of a, b, c.
pub fn gadget_check(alpha: f64, beta: f64, delta_gap: f64) -> Result<GadgetFit> {
    if !(delta_gap > 0.0) || delta_gap / alpha.abs().max(beta.abs()) < MIN_GAP_RATIO {
        return Err(Error::InvalidArgument(format!("gadget needs Δ/max(α,β) ≥ {MIN_GAP_RATIO}")));
    }
    let gamma = 2.0 * alpha * alpha / delta_gap;
    let delta = -beta;
    let id = DMatrix::<f64>::identity(2, 2);
    let sz = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let za = kron_all(&[&sz, &id, &id, &id]);
    let zb = kron_all(&[&id, &sz, &id, &id]);
    let zc = kron_all(&[&id, &id, &sz, &id]);
    let zu = kron_all(&[&id, &id, &id, &sz]);
    let xu = kron_all(&[&id, &id, &id, &sx]);
    let h = &zu * (-delta_gap / 2.0) + (&za + &zb) * &xu * alpha + &zc * &zu * beta + &za * &zb * gamma + &zc * delta;
    let eig = h.symmetric_eigen();

    let mut order: Vec<usize> = (0..16).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    // Labels of a, b, c are conserved, so each low eigenvector has sharp ⟨σᶻ⟩.
    let mut energies = [f64::NAN; 8];
    for &k in &order[..8] {
        let v = eig.eigenvectors.column(k);
        let label = |op: &DMatrix<f64>| (v.transpose() * op * v)[(0, 0)];
        let (la, lb, lc) = (label(&za), label(&zb), label(&zc));
        if [la, lb, lc].iter().any(|l| (l.abs() - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidArgument("low level without sharp σᶻ labels".into()));
        }
        let idx = usize::from(la < 0.0) * 4 + usize::from(lb < 0.0) * 2 + usize::from(lc < 0.0);
        if !energies[idx].is_nan() {
            return Err(Error::InvalidArgument("low sector is not one level per label".into()));
        }
        energies[idx] = eig.eigenvalues[k];
    }

    // Walsh transform: coefficient of Π_{i∈S} z_i is the mean of E·Π z_i.
    let coeff = |mask: usize| {
        let s: f64 = (0..8)
            .map(|idx| {
                let z = [1 - 2 * ((idx >> 2) & 1) as i32, 1 - 2 * ((idx >> 1) & 1) as i32, 1 - 2 * (idx & 1) as i32];
                let sign: i32 = (0..3).filter(|i| mask >> (2 - i) & 1 == 1).map(|i| z[i]).product();
                energies[idx] * sign as f64
            })
            .sum();
        s / 8.0 / delta_gap
    };
    Ok(GadgetFit {
        constant: coeff(0b000),
        z_a: coeff(0b100),
        z_b: coeff(0b010),
        z_c: coeff(0b001),
        z_ab: coeff(0b110),
        z_ac: coeff(0b101),
        z_bc: coeff(0b011),
        z_abc: coeff(0b111),
        predicted_abc: -4.0 * alpha * alpha * beta / (delta_gap * delta_gap * delta_gap),
        two_body_scale: gamma / delta_gap,
        one_body_scale: beta.abs() / delta_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: [u8; 5]) -> Route {
        v
    }

    #[test]
    fn census_matches_the_route_table() {
        let c = enumerate_routes().unwrap();
        assert_eq!(c.total(), 720);
        let table = [
            ([2, 2, 2, 2, 2], 96),
            ([2, 4, 2, 2, 2], 48),
            ([2, 2, 4, 2, 2], 48),
            ([2, 2, 2, 4, 2], 48),
            ([2, 4, 4, 2, 2], 96),
            ([2, 2, 4, 4, 2], 96),
            ([2, 4, 4, 4, 2], 192),
            ([2, 4, 2, 4, 2], 24),
            ([2, 4, 6, 4, 2], 72),
        ];
        assert_eq!(c.routes.len(), table.len());
        for (route, m) in table {
            assert_eq!(c.multiplicity(&r(route)), m, "{route:?}");
        }
        assert_eq!(c.q, Ratio::new(63, 8));
    }

    #[test]
    fn census_is_dihedral_invariant() {
        // Rotating by two sites or reflecting maps X-sites to X-sites.
        let rot = |v: usize| (v + 2) % 6;
        let refl = |v: usize| (7 - v) % 6;
        for order in permutations(6) {
            let base = route_of(&order).unwrap();
            let rotated: Vec<usize> = order.iter().map(|&v| rot(v)).collect();
            let reflected: Vec<usize> = order.iter().map(|&v| refl(v)).collect();
            assert_eq!(route_of(&rotated).unwrap(), base);
            assert_eq!(route_of(&reflected).unwrap(), base);
        }
    }

    #[test]
    fn heaps_algorithm_is_complete() {
        let mut p = permutations(6);
        p.sort();
        p.dedup();
        assert_eq!(p.len(), 720);
    }

    #[test]
    fn gadget_three_body_term() {
        let f = gadget_check(0.02, 0.02, 1.0).unwrap();
        assert!((f.predicted_abc + 3.2e-5).abs() < 1e-12);
        assert!(f.relative_error_abc() < 0.05, "{f:?}");
        assert!(f.one_body_residual() < 0.02, "{f:?}");
        assert!(f.two_body_residual() < 0.02, "{f:?}");
    }

    #[test]
    fn gadget_error_shrinks_with_gap() {
        let e1 = gadget_check(0.02, 0.02, 1.0).unwrap().relative_error_abc();
        let e2 = gadget_check(0.005, 0.005, 1.0).unwrap().relative_error_abc();
        assert!(e2 < e1);
        assert!(gadget_check(0.1, 0.02, 1.0).is_err());
    }
}
