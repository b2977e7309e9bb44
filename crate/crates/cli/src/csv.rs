//! Rate table output. The schema is versioned by the first line; any
//! column change must bump it.

use std::fmt::Write as _;

use qds_core::optimizer::RatePoint;

pub const VERSION_LINE: &str = "# qds-forge csv v1";
pub const HEADER: &str = "distance_km,N,mu,mu1,mu2,q,pz,p0,p1,n,E,Delta1,eph,log2_pg,log2_ph,log2_eps,R,feasible";

/// 17 significant digits; `nan` for missing values.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn row(p: &RatePoint) -> String {
    let mut cells: Vec<String> = Vec::with_capacity(18);
    let q = &p.params;
    cells.push(float(p.distance_km));
    for v in [q.n_pulses, q.mu, q.mu1, q.mu2, q.q, q.p_z, q.p0, q.p1] {
        cells.push(float(v));
    }
    match &p.estimates {
        Some(e) => {
            cells.push(e.n.to_string());
            cells.extend([e.e, e.delta1, e.e_ph].map(float));
        }
        None => cells.extend(["nan"; 4].map(String::from)),
    }
    match &p.report {
        Some(r) => cells.extend([r.p_g.log2(), r.p_h.log2(), r.epsilon().log2()].map(float)),
        None => cells.extend(["nan"; 3].map(String::from)),
    }
    // an infeasible point signs nothing
    cells.push(float(if p.feasible { p.r } else { 0.0 }));
    cells.push(p.feasible.to_string());
    cells.join(",")
}

pub fn render(points: &[RatePoint]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{VERSION_LINE}");
    let _ = writeln!(s, "{HEADER}");
    for p in points {
        let _ = writeln!(s, "{}", row(p));
    }
    s
}
