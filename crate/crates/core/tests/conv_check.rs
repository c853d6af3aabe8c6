use biot_hdiv::harness::{runs, CaseConfig};

#[test]
fn quick_convergence_check() {
    for (k, formulation) in [(1usize, "cg"), (1, "dg"), (2, "cg")] {
        let text = format!("[case]\nname = square\nresolution = 2\n[run]\nkind = convergence\nk = {k}\nformulation = {formulation}\nlevels = 4\n");
        let config = CaseConfig::parse(&text).unwrap();
        let rows = runs::run_convergence(&config).unwrap();
        for (i, r) in rows.iter().enumerate() {
            let rate = if i > 0 {
                biot_hdiv::harness::rate_h(rows[i-1].triple, r.triple, rows[i-1].h, r.h)
            } else { f64::NAN };
            let rate_p = if i > 0 {
                biot_hdiv::harness::rate_h(rows[i-1].e_p, r.e_p, rows[i-1].h, r.h)
            } else { f64::NAN };
            println!("{formulation} k={k} level={} dofs={} triple={:.6e} rate={:.3} e_p={:.4e} rate_p={:.3} eff={:.4e}",
                r.level, r.dofs, r.triple, rate, r.e_p, rate_p, r.eff);
        }
    }
}
