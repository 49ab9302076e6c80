//! Qutrit static protocol: simulated lengths against the a = 1 closed forms.

use geoqsl::experiments::{qutrit_closed_forms, run_qutrit};

fn main() -> geoqsl::Result<()> {
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "lambda*", "l_g", "l_g exact", "l_E", "l_E exact");
    for l in [0.5, 1.0, 2.0, 5.0, 1e3] {
        let r = run_qutrit(2.0, 1.0, l, &Default::default())?.report;
        let exact = qutrit_closed_forms(2.0, l)?;
        println!("{l:>8} {:>12.9} {:>12.9} {:>12.9} {:>12.9}", r.l_g_control, exact.l_g, r.l_e, exact.l_e);
    }
    println!("pi/sqrt2 = {:.9}", std::f64::consts::PI / std::f64::consts::SQRT_2);
    Ok(())
}
