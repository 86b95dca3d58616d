use std::fs;
use std::process::Command;

use nalgebra::DVector;

use gibbslab::convergence::rate_from_norm;
use gibbslab::projection::{analyze_target, Tolerances};
use gibbslab::target::FiniteTarget;
use gibbslab::variance::{
    asymptotic_variance, comparison_constants, kappa, max_l, optimal_r, sigma_block, variance_from_parts, CanonicalParts,
    ScanPolicy,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn binary06_indicator_variances() {
    let t = FiniteTarget::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
    let (space, dec) = analyze_target(&t, Tolerances::default()).unwrap();
    assert_eq!(dec.q(), 1);
    assert!(close(dec.c()[0], 0.6, 1e-12));
    let x2_is_1 = space.function(&[0.0, 1.0, 0.0, 1.0]).unwrap();
    let x1_is_0 = space.function(&[1.0, 1.0, 0.0, 0.0]).unwrap();
    let expect = [
        (&x2_is_1, ScanPolicy::Dg, 1.0625),
        (&x2_is_1, ScanPolicy::Rg { r: 0.5 }, 1.875),
        (&x1_is_0, ScanPolicy::Mdg { l: 2 }, 1.59375),
    ];
    for (f, p, v) in expect {
        assert!(close(asymptotic_variance(f, &dec, &p, 1.0).unwrap().v, v, 1e-12), "{p}");
    }
}

#[test]
fn sigma_d_for_single_pair() {
    let s = sigma_block(&ScanPolicy::Dg, &DVector::from_element(1, 0.6), 1e-6).unwrap();
    let want = [[4.25, 1.5], [1.5, 2.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!(close(s[(i, j)], want[i][j], 1e-12));
        }
    }
}

#[test]
fn example_two_variances() {
    // f in (I - P1)M: V_D = 2|f|^2, V_R = (1+r)/(1-r) |f|^2
    let parts = CanonicalParts {
        n01: 0.0,
        n10: 0.0,
        n11: 0.0,
        c: DVector::from_element(1, 0.6),
        x0: DVector::zeros(1),
        x1: DVector::from_element(1, 1.5),
        tol_one: 1e-6,
    };
    let norm = 2.25;
    assert!(close(variance_from_parts(&parts, &ScanPolicy::Dg, 1.0).unwrap().v, 2.0 * norm, 1e-12));
    for r in [0.1, 0.3, 0.7] {
        let v = variance_from_parts(&parts, &ScanPolicy::Rg { r }, 1.0).unwrap().v;
        assert!(close(v, (1.0 + r) / (1.0 - r) * norm, 1e-12));
    }
}

#[test]
fn comparison_constant_values() {
    let (k1, k2) = comparison_constants(0.5);
    assert!(close(k1, 1.0, 1e-15) && close(k2, 2.0, 1e-15));
    assert!(close(comparison_constants(0.1).0, 0.91 + (0.0081f64 + 0.64).sqrt(), 1e-12));
    assert!(close(kappa(9.0, 0.1), 10.0 / 3.6, 1e-12));
    assert!(close(kappa(9.0, 1.0 / 3.0), 10.0 / (2.0 * (3.0 + 2.0 / 3.0)), 1e-12));
    assert_eq!(optimal_r(1.0), 0.5);
    assert!(close(optimal_r(4.0), (-9.0 + 216f64.sqrt()) / 15.0, 1e-12));
    assert!(optimal_r(1e6) < 0.002);
    assert_eq!((max_l(1.0), max_l(19.0), max_l(0.5)), (2, 5, 1));
}

#[test]
fn binary_rates() {
    assert!(close(rate_from_norm(&ScanPolicy::Dg, 0.6), 0.6, 1e-15));
    assert!(close(rate_from_norm(&ScanPolicy::Rg { r: 0.5 }, 0.6), 0.8, 1e-15));
    assert!(close(rate_from_norm(&ScanPolicy::Rss, 0.6), 0.48, 1e-15));
}

#[test]
fn analyze_output_matches_frozen_report() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_gibbslab"))
        .args(["analyze", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let golden = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/binary06");
    for f in ["variance.json", "rates.json", "orderings.csv", "decomposition.json"] {
        let got = fs::read_to_string(dir.path().join(f)).unwrap();
        let want = fs::read_to_string(format!("{golden}/{f}")).unwrap();
        assert_eq!(got, want, "{f} differs from the frozen copy");
    }
}
