use proptest::prelude::*;

use haarsg::algebra::GalerkinTensor;
use haarsg::basis::HaarTypeBasis;
use haarsg::config::{parse_config, BasisChoice, RunConfig};
use haarsg::models::Preset;
use haarsg::reference::{exact_scalar, mean_std};
use haarsg::solver::{Boundary, GpcField, Grid};

fn tensor(kind: u8, param: usize) -> GalerkinTensor {
    let b = match kind {
        0 => HaarTypeBasis::classical_haar(param as u32),
        1 => HaarTypeBasis::dct(2 + 2 * param),
        _ => HaarTypeBasis::canonical_haar(2 + param),
    };
    GalerkinTensor::new(&b.unwrap()).unwrap()
}

fn modes(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

fn tensor_and_modes() -> impl Strategy<Value = (u8, usize, Vec<f64>, Vec<f64>)> {
    (0u8..3, 0usize..4).prop_flat_map(|(k, p)| {
        let n = tensor(k, p).size();
        (Just(k), Just(p), modes(n), modes(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn spectrum_round_trip((k, p, u, _) in tensor_and_modes()) {
        let t = tensor(k, p);
        let back = t.from_spectrum(&t.to_spectrum(&u).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&u) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn galerkin_product_commutes((k, p, u, q) in tensor_and_modes()) {
        let t = tensor(k, p);
        let uq = t.galerkin_product(&u, &q).unwrap();
        let qu = t.galerkin_product(&q, &u).unwrap();
        for (a, b) in uq.iter().zip(qu.iter()) {
            prop_assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn statistics_match_equiprobable_realizations((k, p, u, _) in tensor_and_modes()) {
        let t = tensor(k, p);
        let mut g = Grid::new_1d(8, (0.0, 1.0), Boundary::Periodic).unwrap();
        g.nx = 1;
        let mut f = GpcField::zeros(&g, 1, t.size());
        f.data.copy_from_slice(&u);
        let st = mean_std(&f, &t);
        let d = t.to_spectrum(&u).unwrap();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        prop_assert!((st.mean[0] - mean).abs() < 1e-12);
        prop_assert!((st.std[0] - var.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_render_round_trips(
        cfl in 0.01..0.99f64,
        t_final in 0.0..3.0f64,
        nx in 8usize..2000,
        level in 0u32..6,
        seed in 0..=i64::MAX as u64,
        stride in 0usize..50,
        eps in 1e-12..1e-2f64,
    ) {
        let mut c = RunConfig::for_preset(Preset::ScalarOleinik);
        c.cfl = cfl;
        c.t_final = t_final;
        c.grid.nx = nx;
        c.basis = BasisChoice::ClassicalHaar { level };
        c.seed = seed;
        c.output_stride = stride;
        c.cweno.epsilon = eps;
        prop_assert_eq!(parse_config(&c.render()).unwrap(), c.clone());
        c.seed = u64::MAX;
        prop_assert!(c.validate().is_err());
    }
}

#[test]
fn exact_scalar_branches_join_continuously() {
    let t = 0.2;
    let xi = 0.3;
    for s in [-3.0, -1.0, 1.0, 3.0f64] {
        let x = s * t + (xi - 0.5);
        let h = 1e-13;
        let (a, b) = (
            exact_scalar(t, x - h, xi).unwrap(),
            exact_scalar(t, x + h, xi).unwrap(),
        );
        assert!((a - b).abs() < 1e-12, "jump at s = {s}: {a} vs {b}");
    }
}
