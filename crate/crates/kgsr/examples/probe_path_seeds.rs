use kgsr::estimators::SampleSet;
use kgsr::kernels::{bandlimited_kernel, lowpass_band};
use kgsr::mkl::*;
use kgsr::synth::*;

fn main() {
    let bandwidths: Vec<usize> = (1..=17).map(|m| 5 * m + 5).collect();
    let grid = [1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1, 3.16e-1, 1.0];
    let mut hits = 0;
    let mut picks = Vec::new();
    for seed in 0..20u64 {
        let trial_seed = derive_seed(seed, 0);
        let g = kgsr::Graph::erdos_renyi(250, 0.25, derive_seed(trial_seed, 0)).unwrap();
        let spec = kgsr::eigendecompose(&g.laplacian(kgsr::LaplacianKind::Combinatorial).unwrap()).unwrap();
        let inst = signal_instance(&spec, &lowpass_band(20), 20.0, derive_seed(trial_seed, 1)).unwrap();
        let idx = sample_uniform(250, 80, derive_seed(trial_seed, 2)).unwrap();
        let samples = SampleSet::from_signal(idx, &inst.noisy_full).unwrap();
        let kernels: Vec<_> = bandwidths.iter().map(|&b| bandlimited_kernel(&spec, &lowpass_band(b), 1000.0).unwrap()).collect();
        let labels: Vec<String> = bandwidths.iter().map(|b| format!("b{b}")).collect();
        let dict = KernelDictionary::with_trace_target(kernels, labels, Some(250.0)).unwrap();
        let path = sparsity_path(&dict, &samples, &grid, &AdmmParams::default()).unwrap();
        let last = last_to_vanish(&path, 1e-8).map(|m| bandwidths[m]);
        picks.push(last);
        if last == Some(20) { hits += 1; }
    }
    println!("last-to-vanish = 20 in {hits}/20 seeds; picks: {picks:?}");
}
