//! CSV rows for level records.

use extrinsic_core::identities::LevelRecord;

pub const SWEEP_COLUMNS: [&str; 15] = [
    "t",
    "regular",
    "v",
    "vprime_coarea",
    "chi_Mt",
    "intK",
    "intH2",
    "intA2",
    "int_xperpH",
    "int_xperpH_abs",
    "u1",
    "u2",
    "prop22_res",
    "prop23_res",
    "min_grad_r",
];

/// Shortest round-trip decimal; empty when the value is undefined.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}

/// One row per level. Boundary-derived columns are empty on non-regular
/// levels.
pub fn sweep_csv(records: &[LevelRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS).expect("write to memory");
    for r in records {
        let b = |x: f64| if r.regular { num(x) } else { String::new() };
        w.write_record([
            num(r.t),
            r.regular.to_string(),
            num(r.v),
            b(r.vprime_coarea),
            r.chi_mt.to_string(),
            num(r.int_k),
            num(r.int_h2),
            num(r.int_a2),
            num(r.int_xperp_h),
            num(r.int_xperp_h_abs),
            num(r.u1),
            num(r.u2),
            b(r.prop22_residual),
            b(r.prop23_residual),
            num(r.min_grad_r),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
}
