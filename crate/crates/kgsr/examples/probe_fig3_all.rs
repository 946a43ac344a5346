use kgsr::estimators::{ls_bandlimited, SampleSet};
use kgsr::kernels::{bandlimited_kernel, lowpass_band};
use kgsr::mkl::*;
use kgsr::synth::*;

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(42);
    let trace: f64 = std::env::args().nth(2).and_then(|v| v.parse().ok()).unwrap_or(2e4);
    let s_values = [40usize, 50, 60, 70, 80, 90, 100];
    let bandwidths = [10usize, 15, 20, 25, 30];
    let mut rs_acc = vec![NmseAccumulator::default(); s_values.len()];
    let mut ls_acc = vec![NmseAccumulator::default(); s_values.len()];
    for trial in 0..100u64 {
        let trial_seed = derive_seed(seed, trial);
        let g = kgsr::Graph::erdos_renyi(100, 0.25, derive_seed(trial_seed, 0)).unwrap();
        let spec = kgsr::eigendecompose(&g.laplacian(kgsr::LaplacianKind::Combinatorial).unwrap()).unwrap();
        let inst = signal_instance(&spec, &lowpass_band(20), 10.0, derive_seed(trial_seed, 1)).unwrap();
        let kernels: Vec<_> = bandwidths.iter().map(|&b| bandlimited_kernel(&spec, &lowpass_band(b), 1e4).unwrap()).collect();
        let labels: Vec<String> = bandwidths.iter().map(|b| format!("b{b}")).collect();
        let dict = KernelDictionary::with_trace_target(kernels, labels, Some(trace)).unwrap();
        for (i, &s) in s_values.iter().enumerate() {
            let idx = sample_uniform(100, s, derive_seed(trial_seed, 2 + i as u64)).unwrap();
            let samples = SampleSet::from_signal(idx, &inst.noisy_full).unwrap();
            let sol = rs_admm(&dict, &samples, 0.1, &AdmmParams::default()).unwrap();
            let est = rs_reconstruct(&dict, &samples, &sol).unwrap();
            rs_acc[i].add(&inst.truth, est.values());
            if let Ok(ls) = ls_bandlimited(&spec, &lowpass_band(20), &samples) {
                ls_acc[i].add(&inst.truth, ls.values());
            }
        }
    }
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, &s) in s_values.iter().enumerate() {
        let ratio = rs_acc[i].value().unwrap() / ls_acc[i].value().unwrap();
        worst = worst.max(ratio);
        parts.push(format!("S{s}={ratio:.3}"));
    }
    println!("seed={seed} trace={trace:.0} worst={worst:.3} [{}]", parts.join(" "));
}
