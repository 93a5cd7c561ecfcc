//! Property tests over random inputs.

use proptest::prelude::*;

use crate::evolve::{free_propagate, nonlinear_substep, State};
use crate::grid::{norm_sq, Field, GridDesc};
use crate::nonlin::{check_mass_resonance, derive_fk, eval_fk, System, SystemSpec};
use crate::C64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resonance_only_at_one_half(kappa in 0.05f64..4.0) {
        prop_assume!((kappa - 0.5).abs() > 1e-9);
        prop_assert!(!check_mass_resonance(&SystemSpec::canonical(kappa)));
    }

    #[test]
    fn canonical_fk_match_closed_form(re1 in -3.0f64..3.0, im1 in -3.0f64..3.0, re2 in -3.0f64..3.0, im2 in -3.0f64..3.0) {
        let spec = SystemSpec::canonical(0.5);
        prop_assert_eq!(derive_fk(&spec).len(), 2);
        let z = vec![C64::new(re1, im1), C64::new(re2, im2)];
        let f1 = eval_fk(&spec, 0, &[z.clone()])[0];
        let f2 = eval_fk(&spec, 1, &[z.clone()])[0];
        prop_assert!((f1 - 2.0 * z[0].conj() * z[1]).norm() <= 1e-12 * (1.0 + f1.norm()));
        prop_assert!((f2 - z[0] * z[0]).norm() <= 1e-12 * (1.0 + f2.norm()));
    }

    #[test]
    fn free_flow_is_unitary(dt in -2.0f64..2.0, width in 0.5f64..4.0, kick in -2.0f64..2.0) {
        let sys = System::canonical(0.5);
        let g = GridDesc::cartesian1(256, 30.0).unwrap();
        let u = Field::from_fn(g, 2, |k, x| C64::from_polar((-x * x / width).exp(), kick * x * (k + 1) as f64));
        let out = free_propagate(&sys, &State::new(u.clone()), dt);
        for k in 0..2 {
            let (a, b) = (norm_sq(&g, &u.comps[k]), norm_sq(&g, &out.field.comps[k]));
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn nonlinear_step_keeps_local_charge(amp in 0.0f64..3.0, phase in -3.0f64..3.0, dt in 0.0f64..1e-3) {
        let sys = System::canonical(0.5);
        let g = GridDesc::radial(5, 32, 4.0).unwrap();
        let u = Field::from_fn(g, 2, |k, r| C64::from_polar(amp * (-r * r / 2.0).exp(), phase * (k as f64 + r)));
        let out = nonlinear_substep(&sys, &State::new(u.clone()), dt, 1);
        for j in 0..g.len() {
            let q = |f: &Field| 0.5 * f.comps[0][j].norm_sqr() + f.comps[1][j].norm_sqr();
            prop_assert!((q(&out.field) - q(&u)).abs() <= 1e-10 * q(&u).max(1e-300));
        }
    }
}
