use kgsr::experiments::{DictionaryConfig, ExperimentConfig};
use kgsr::estimators::SampleSet;
use kgsr::kernels::lowpass_band;
use kgsr::mkl::{naive_bandwidth, rs_admm, AdmmParams, KernelDictionary};
use kgsr::synth::{derive_seed, sample_uniform, signal_instance};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let true_band: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let trace: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(250.0);
    let mu: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let seed: u64 = 42;
    let bandwidths: Vec<usize> = (1..=17).map(|m| 5 * m + 5).collect();
    let bw_f: Vec<f64> = bandwidths.iter().map(|&b| b as f64).collect();
    let mut picks = Vec::new();
    for trial in 0..200u64 {
        let trial_seed = derive_seed(seed, trial);
        let g = kgsr::Graph::erdos_renyi(250, 0.25, derive_seed(trial_seed, 0)).unwrap();
        let spec = kgsr::eigendecompose(&g.laplacian(kgsr::LaplacianKind::Combinatorial).unwrap()).unwrap();
        let inst = signal_instance(&spec, &lowpass_band(true_band), 20.0, derive_seed(trial_seed, 1)).unwrap();
        let idx = sample_uniform(250, 80, derive_seed(trial_seed, 2)).unwrap();
        let samples = SampleSet::from_signal(idx, &inst.noisy_full).unwrap();
        let kernels: Vec<_> = bandwidths.iter().map(|&b| kgsr::kernels::bandlimited_kernel(&spec, &lowpass_band(b), 1000.0).unwrap()).collect();
        let labels = bandwidths.iter().map(|b| format!("b{b}")).collect();
        let dict = KernelDictionary::with_trace_target(kernels, labels, Some(trace)).unwrap();
        let sol = rs_admm(&dict, &samples, mu, &AdmmParams::default()).unwrap();
        let normssq: Vec<f64> = sol.norms.iter().map(|v| v * v).collect();
        let pick = naive_bandwidth(&normssq, &bw_f).unwrap_or(f64::NAN);
        picks.push(pick);
    }
    let mut hist = std::collections::BTreeMap::new();
    for p in &picks { *hist.entry(format!("{p}")).or_insert(0) += 1; }
    println!("B={true_band} trace={trace} mu={mu}: {:?}", hist);
}
