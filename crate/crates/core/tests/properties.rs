use std::f64::consts::PI;

use fdasim::array::{array_factor, array_factor_closed_form};
use fdasim::metrics::{evm_of, isl_of};
use fdasim::waveform::{antenna_spectrum_via_ici, generate_qpsk_frame, ici_coefficient, Dft, Transmitter, ScanSignal};
use fdasim::{AntennaIndex, Complex, FdaConfig, OfdmNumerology};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ici_is_circulant(n in 2usize..512, twice in -15i32..=15, eps in 0.0f64..1.0, off in -600i64..600) {
        let m = AntennaIndex::from_twice(twice);
        let a = ici_coefficient(n, m, eps, off);
        let b = ici_coefficient(n, m, eps, off + n as i64);
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn af_closed_form_matches_sum(m in 1usize..=16, df in 1e2f64..1e5, theta in -PI / 2.0..PI / 2.0, cycles in 0.0f64..5.0) {
        let cfg = FdaConfig::half_wavelength(m, 60e9, df).unwrap();
        let t = cycles / df;
        let d = (array_factor(&cfg, theta, t) - array_factor_closed_form(&cfg, theta, t)).norm();
        prop_assert!(d < 1e-12);
        prop_assert!(array_factor(&cfg, theta, t).norm() <= (m as f64).sqrt() + 1e-12);
    }

    #[test]
    fn dft_and_ici_paths_agree(k in 2usize..96, twice in -7i32..=7, eps in 0.0f64..1.0, seed in any::<u64>()) {
        let frame = generate_qpsk_frame(k, seed).unwrap();
        let m = AntennaIndex::from_twice(twice);
        let mut y = frame.symbols.clone();
        let dft = Dft::new(k);
        dft.inverse(&mut y);
        let mut shifted = fdasim::waveform::apply_frequency_shift(&y, m, eps, 4);
        dft.forward(&mut shifted);
        let via_ici = antenna_spectrum_via_ici(&frame, m, eps, 4);
        for (a, b) in shifted.iter().zip(&via_ici) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn evm_invariant_under_common_rotation(seed in any::<u64>(), phi in 0.0f64..(2.0 * PI), noise in 0.0f64..0.5) {
        let s = generate_qpsk_frame(32, seed).unwrap().symbols;
        let r: Vec<Complex> = s.iter().enumerate().map(|(i, v)| v * (1.0 + noise * (i as f64 / 32.0))).collect();
        let rot = Complex::from_polar(1.0, phi);
        let s2: Vec<Complex> = s.iter().map(|v| v * rot).collect();
        let r2: Vec<Complex> = r.iter().map(|v| v * rot).collect();
        prop_assert!((evm_of(&s, &r).unwrap() - evm_of(&s2, &r2).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn isl_invariant_under_scaling(seed in any::<u64>(), re in 0.1f64..10.0, im in -10.0f64..10.0) {
        let p = generate_qpsk_frame(64, seed).unwrap().symbols;
        let mut p: Vec<Complex> = p.iter().enumerate().map(|(i, v)| v / (1.0 + i as f64)).collect();
        let a = isl_of(&p).unwrap();
        let g = Complex::new(re, im);
        p.iter_mut().for_each(|v| *v *= g);
        prop_assert!((a - isl_of(&p).unwrap()).abs() < 1e-12 * a.max(1.0));
    }

    #[test]
    fn transmit_power_is_conserved(m in 1usize..9, seed in 0u64..1000) {
        let num = OfdmNumerology::new(64, 100e6, 16, 1).unwrap();
        let dfmax = fdasim::numerology::max_scan_frequency_hz(&num, m);
        let cfg = FdaConfig::half_wavelength(m, 60e9, dfmax).unwrap();
        let scan = ScanSignal::new(&num, &cfg, seed).unwrap();
        let tx = Transmitter::new(&num, &cfg).symbol(&scan, 0).unwrap();
        let total: f64 = tx.steered.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>() / 64.0;
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
