use std::sync::Arc;

use super::*;
use crate::geometry::{rasterize, rasterize_with, DomainSpec, GridDomain};
use crate::la;
use crate::potential::MeasureDensity;

const PI: f64 = std::f64::consts::PI;

fn disk(r: f64, res: usize) -> Arc<GridDomain<2>> {
    Arc::new(rasterize::<2>(&DomainSpec::ball(2, &[0.0, 0.0], r), res).unwrap())
}

fn auto_opts() -> BalayageOptions {
    BalayageOptions {
        omega: None,
        ..Default::default()
    }
}

/// 1D radial finite-volume obstacle solve: the independent oracle for the
/// radial point-mass quadrature-domain case. Returns (saturated radius,
/// deficiency sampled at r = 1/2).
fn radial_oracle(mass: f64, nu: f64, r_out: f64, cells: usize) -> (f64, f64) {
    let dr = r_out / cells as f64;
    let rc = |j: usize| (j as f64 + 0.5) * dr;
    let face = |j: f64| j * dr; // r at face index
    let mut w = vec![0.0f64; cells];
    // q_j = mu_j - nu with the atom deposited in cell 0
    let cell0_vol = PI * face(1.0).powi(2);
    let mut q = vec![-nu; cells];
    q[0] += mass / cell0_vol;
    // A w = -(1/r)(r w')' with w(r_out) = 0 (ghost zero)
    let omega = 1.95;
    for _ in 0..200_000 {
        let mut delta = 0.0f64;
        for j in 0..cells {
            let rm = face(j as f64);
            let rp = face(j as f64 + 1.0);
            let am = if j > 0 { rm / (rc(j) * dr * dr) } else { 0.0 };
            let ap = rp / (rc(j) * dr * dr);
            let diag = am + ap;
            let mut rhs = q[j];
            if j > 0 {
                rhs += am * w[j - 1];
            }
            if j + 1 < cells {
                rhs += ap * w[j + 1];
            }
            let cand = ((1.0 - omega) * w[j] + omega * rhs / diag).max(0.0);
            delta = delta.max((cand - w[j]).abs());
            w[j] = cand;
        }
        if delta < 1e-13 {
            break;
        }
    }
    let thresh = 1e-7 * w.iter().cloned().fold(0.0f64, f64::max);
    let sat_r = w
        .iter()
        .enumerate()
        .rev()
        .find(|(_, v)| **v > thresh)
        .map(|(j, _)| rc(j))
        .unwrap_or(0.0);
    let j_half = (0.5 / dr - 0.5).round() as usize;
    (sat_r, w[j_half])
}

#[test]
fn radial_oracle_matches_closed_form() {
    // atom of mass 2π onto ν = 2m in B(0,4): saturated disk radius 1 and
    // w(r) = -ln r + (r² - 1)/2 inside it
    let (rho, w_half) = radial_oracle(2.0 * PI, 2.0, 4.0, 4000);
    assert!((rho - 1.0).abs() < 5e-3, "oracle radius {rho}");
    let exact = -(0.5f64).ln() + (0.25 - 1.0) / 2.0;
    assert!(
        (w_half - exact).abs() < 1e-3,
        "oracle w(1/2) = {w_half} vs {exact}"
    );
}

#[test]
fn inactive_obstacle_is_identity() {
    let dom = disk(2.0, 64);
    let nu = MeasureDensity::uniform(dom.clone(), 2.0).unwrap();
    let res = partial_balayage(&dom, &nu, &nu, &auto_opts()).unwrap();
    assert!(res.deficiency.max_abs() == 0.0);
    assert!(res.saturated.iter().all(|s| !s));
    for k in 0..dom.len() {
        assert!((res.eta.density[k] - nu.density[k]).abs() < 1e-12);
    }
}

#[test]
fn radial_point_mass_quadrature_domain() {
    let dom = disk(4.0, 192);
    let h = dom.h();
    let nu = MeasureDensity::uniform(dom.clone(), 2.0).unwrap();
    let mu = MeasureDensity::new(
        dom.clone(),
        vec![0.0; dom.len()],
        vec![([0.0, 0.0], 2.0 * PI)],
    )
    .unwrap();
    let res = partial_balayage(&dom, &mu, &nu, &auto_opts()).unwrap();

    assert!(
        res.residual <= 1e-8,
        "complementarity residual {}",
        res.residual
    );
    assert!(
        res.cap_excess <= 1e-8,
        "eta exceeds nu by {}",
        res.cap_excess
    );

    // saturated set is a disk of radius 1 (within 2h), single component,
    // containing the origin
    let area = res.saturated.iter().filter(|s| **s).count() as f64 * h * h;
    let rho = (area / PI).sqrt();
    assert!(
        (rho - 1.0).abs() <= 2.0 * h,
        "saturated radius {rho}, h = {h}"
    );
    let (mask, comps) = res.saturated_set(res.default_threshold());
    assert_eq!(comps, 1);
    assert!(mask[crate::potential::host_cell(&dom, &[0.0, 0.0])]);

    // the oracle agrees on the radius
    let (rho_oracle, w_half_oracle) = radial_oracle(2.0 * PI, 2.0, 4.0, 4000);
    assert!((rho - rho_oracle).abs() <= 2.0 * h + 5e-3);

    // eta equals the cap on the saturated set (sampled away from the atom)
    for k in 0..dom.len() {
        if res.saturated[k] {
            let x = dom.geom.cell_center(&dom.geom.unindex(k));
            if la::norm(&x) > 0.2 && la::norm(&x) < 0.8 {
                assert!(
                    (res.eta.density[k] - 2.0).abs() < 1e-6,
                    "eta = {} at {x:?}",
                    res.eta.density[k]
                );
            }
        }
    }

    // deficiency value against the radial oracle at r = 1/2
    let w_mid = crate::potential::sample_scalar(&res.deficiency, &[0.5, 0.0]);
    assert!(
        (w_mid - w_half_oracle).abs() < 4.0 * h,
        "w(1/2) = {w_mid} vs oracle {w_half_oracle}"
    );

    // mass conserved: S is well inside O
    assert!(
        (res.mass.eta_total - res.mass.mu_total).abs() <= 1e-6 * res.mass.mu_total,
        "mass {} -> {}",
        res.mass.mu_total,
        res.mass.eta_total
    );

    // structure identity on the unsaturated side: eta = mu (zero away from
    // the atom)
    for k in 0..dom.len() {
        if dom.inside[k] && !res.saturated[k] {
            let x = dom.geom.cell_center(&dom.geom.unindex(k));
            if la::norm(&x) > 1.2 {
                assert!(res.eta.density[k].abs() <= 1e-8, "eta leaked to {x:?}");
            }
        }
    }
}

fn bump(dom: &Arc<GridDomain<2>>, center: [f64; 2], radius: f64, amp: f64) -> Vec<f64> {
    (0..dom.len())
        .map(|k| {
            let x = dom.geom.cell_center(&dom.geom.unindex(k));
            let t = la::dist2(&x, &center) / (radius * radius);
            if t < 1.0 && dom.inside[k] {
                amp * (1.0 - t) * (1.0 - t)
            } else {
                0.0
            }
        })
        .collect()
}

#[test]
fn bump_mass_conserved_without_leakage() {
    // μ = ν on a subdomain plus a bump: the sweep stops once the excess is
    // absorbed, well before the container boundary.
    let dom = disk(3.0, 96);
    let omega = rasterize_with::<2>(&DomainSpec::ball(2, &[0.0, 0.0], 1.2), &dom.geom).unwrap();
    let nu = MeasureDensity::uniform(dom.clone(), 2.0).unwrap();
    let mu_d: Vec<f64> = (0..dom.len())
        .map(|k| if omega.inside[k] { 2.0 } else { 0.0 })
        .zip(bump(&dom, [0.4, -0.2], 0.5, 1.5))
        .map(|(a, b)| a + b)
        .collect();
    let mu = MeasureDensity::new(dom.clone(), mu_d, vec![]).unwrap();
    let res = partial_balayage(&dom, &mu, &nu, &auto_opts()).unwrap();
    assert!((res.mass.eta_total - res.mass.mu_total).abs() <= 1e-6 * res.mass.mu_total);
    assert!(res.mass.boundary_leakage.abs() <= 1e-6 * res.mass.mu_total);
    // saturated set stays well inside the container
    for k in 0..dom.len() {
        if res.saturated[k] {
            assert!(dom.sdf[k] < -4.0 * dom.h());
        }
    }
}

#[test]
fn saturated_set_covers_omega_when_mu_dominates() {
    // μ ≥ ν on a connected Ω with (μ-ν)(Ω) > 0 saturates all of Ω.
    let dom = disk(3.0, 96);
    let omega = rasterize_with::<2>(&DomainSpec::ball(2, &[0.0, 0.0], 1.0), &dom.geom).unwrap();
    let nu = MeasureDensity::uniform(dom.clone(), 2.0).unwrap();
    let mu_d: Vec<f64> = (0..dom.len())
        .map(|k| if omega.inside[k] { 2.6 } else { 0.0 })
        .collect();
    let mu = MeasureDensity::new(dom.clone(), mu_d, vec![]).unwrap();
    let res = partial_balayage(&dom, &mu, &nu, &auto_opts()).unwrap();
    for k in 0..dom.len() {
        if omega.inside[k] {
            assert!(res.saturated[k], "Ω cell {k} not saturated");
        }
    }
}

#[test]
fn monotone_in_mu() {
    let dom = disk(3.0, 80);
    let omega = rasterize_with::<2>(&DomainSpec::ball(2, &[0.0, 0.0], 1.3), &dom.geom).unwrap();
    let nu = MeasureDensity::uniform(dom.clone(), 2.0).unwrap();
    let mu_d: Vec<f64> = (0..dom.len())
        .map(|k| if omega.inside[k] { 2.0 } else { 0.0 })
        .zip(bump(&dom, [-0.5, 0.3], 0.45, 2.0))
        .map(|(a, b)| a + b)
        .collect();
    let mu1_d: Vec<f64> = mu_d
        .iter()
        .zip(bump(&dom, [0.6, 0.1], 0.4, 1.2))
        .map(|(a, b)| a + b)
        .collect();
    let mu = MeasureDensity::new(dom.clone(), mu_d, vec![]).unwrap();
    let mu1 = MeasureDensity::new(dom.clone(), mu1_d, vec![]).unwrap();
    let r = partial_balayage(&dom, &mu, &nu, &auto_opts()).unwrap();
    let r1 = partial_balayage(&dom, &mu1, &nu, &auto_opts()).unwrap();
    // swept measures are ordered cellwise
    for k in 0..dom.len() {
        assert!(
            r1.eta.density[k] >= r.eta.density[k] - 1e-7,
            "eta ordering violated at {k}"
        );
    }
    // saturated sets are nested up to a one-cell halo
    let geom = &dom.geom;
    for k in 0..dom.len() {
        if !r.saturated[k] {
            continue;
        }
        let idx = geom.unindex(k);
        let mut hit = r1.saturated[k];
        for i in 0..2 {
            for dir in [-1isize, 1] {
                if let Some(nb) = geom.neighbor(&idx, i, dir) {
                    hit |= r1.saturated[geom.index(&nb)];
                }
            }
        }
        assert!(hit, "S(mu) cell {k} outside one-cell halo of S(mu1)");
    }
    // deficiency stays nonnegative by construction
    assert!(r1.deficiency.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn support_control_examples() {
    let container = disk(4.0, 128);
    let omega =
        rasterize_with::<2>(&DomainSpec::ball(2, &[0.0, 0.0], 1.0), &container.geom).unwrap();
    let omega0 =
        rasterize_with::<2>(&DomainSpec::ball(2, &[0.0, 0.0], 1.5), &container.geom).unwrap();

    // τ = 0: any b passes with an empty saturated set
    let tau0 = MeasureDensity::new(container.clone(), vec![0.0; container.len()], vec![]).unwrap();
    let r = support_control_test(&container, &omega, &tau0, &omega0, &auto_opts()).unwrap();
    assert!(r.pass && r.largest_b == 1.0);

    // unit atom at the origin: some b > 0 keeps the sweep inside Ω₀
    let tau = MeasureDensity::new(
        container.clone(),
        vec![0.0; container.len()],
        vec![([0.0, 0.0], 1.0)],
    )
    .unwrap();
    let r = support_control_test(&container, &omega, &tau, &omega0, &auto_opts()).unwrap();
    assert!(r.pass, "attempts: {:?}", r.attempts);
    assert!(r.largest_b > 0.0);

    // a huge b makes the saturated set escape Ω₀ (recorded as a failing probe)
    let b = 30.0;
    let nu = MeasureDensity::uniform(container.clone(), 2.0).unwrap();
    let mu_d: Vec<f64> = (0..container.len())
        .map(|k| if omega.inside[k] { 2.0 } else { 0.0 })
        .collect();
    let mut mu = MeasureDensity::new(container.clone(), mu_d, vec![]).unwrap();
    mu.atoms.push(([0.0, 0.0], b));
    let res = partial_balayage(&container, &mu, &nu, &auto_opts()).unwrap();
    let escaped = res
        .saturated
        .iter()
        .enumerate()
        .any(|(k, s)| *s && !omega0.inside[k]);
    assert!(escaped, "mass balance should push the sweep past Ω₀");
}
