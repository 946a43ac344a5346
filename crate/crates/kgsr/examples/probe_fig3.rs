use kgsr::estimators::{ls_bandlimited, SampleSet};
use kgsr::kernels::{bandlimited_kernel, lowpass_band};
use kgsr::mkl::*;
use kgsr::synth::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let s: usize = args.get(1).and_then(|v| v.parse().ok()).unwrap_or(40);
    let rs_trace: f64 = args.get(2).and_then(|v| v.parse().ok()).unwrap_or(1e4);
    let ks_trace: f64 = args.get(3).and_then(|v| v.parse().ok()).unwrap_or(300.0);
    let trials: u64 = args.get(4).and_then(|v| v.parse().ok()).unwrap_or(30);
    let bandwidths = [10usize, 15, 20, 25, 30];
    let (mut rs_acc, mut ks_acc, mut ls_acc) = (
        NmseAccumulator::default(),
        NmseAccumulator::default(),
        NmseAccumulator::default(),
    );
    for trial in 0..trials {
        let trial_seed = derive_seed(std::env::var("PROBE_SEED").ok().and_then(|v| v.parse().ok()).unwrap_or(42), trial);
        let g = kgsr::Graph::erdos_renyi(100, 0.25, derive_seed(trial_seed, 0)).unwrap();
        let spec =
            kgsr::eigendecompose(&g.laplacian(kgsr::LaplacianKind::Combinatorial).unwrap())
                .unwrap();
        let inst = signal_instance(&spec, &lowpass_band(20), 10.0, derive_seed(trial_seed, 1)).unwrap();
        let idx = sample_uniform(100, s, derive_seed(trial_seed, 2)).unwrap();
        let samples = SampleSet::from_signal(idx, &inst.noisy_full).unwrap();
        let kernels: Vec<_> = bandwidths
            .iter()
            .map(|&b| bandlimited_kernel(&spec, &lowpass_band(b), 1e4).unwrap())
            .collect();
        let labels: Vec<String> = bandwidths.iter().map(|b| format!("b{b}")).collect();
        let rs_dict =
            KernelDictionary::with_trace_target(kernels.clone(), labels.clone(), Some(rs_trace))
                .unwrap();
        let ks_dict =
            KernelDictionary::with_trace_target(kernels, labels, Some(ks_trace)).unwrap();
        let rho: f64 = std::env::var("PROBE_RHO").ok().and_then(|v| v.parse().ok()).unwrap_or(1.0);
        let eps: f64 = std::env::var("PROBE_EPS").ok().and_then(|v| v.parse().ok()).unwrap_or(1e-6);
        let sol = rs_admm(&rs_dict, &samples, 0.1, &AdmmParams { rho, eps, max_iter: 100000 }).unwrap();
        let rs_est = rs_reconstruct(&rs_dict, &samples, &sol).unwrap();
        rs_acc.add(&inst.truth, rs_est.values());
        let ks_sol = ks_iia(&ks_dict, &samples, 5e-3, &[0.0; 5], &IiaParams::default()).unwrap();
        let ks_est = ks_reconstruct(&ks_dict, &samples, &ks_sol).unwrap();
        ks_acc.add(&inst.truth, ks_est.values());
        if let Ok(ls) = ls_bandlimited(&spec, &lowpass_band(20), &samples) {
            ls_acc.add(&inst.truth, ls.values());
        }
    }
    let ls = ls_acc.value().unwrap_or(f64::NAN);
    let rs = rs_acc.value().unwrap_or(f64::NAN);
    let ks = ks_acc.value().unwrap_or(f64::NAN);
    println!(
        "S={s} rs_trace={rs_trace:.0} ks_trace={ks_trace:.0}: RS={rs:.4} KS={ks:.4} LS20={ls:.4} RS/LS={:.3} KS/LS={:.3}",
        rs / ls,
        ks / ls
    );
}
