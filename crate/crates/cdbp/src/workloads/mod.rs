//! Workload construction: the server/VM catalogs used throughout the
//! experiments, a seeded synthetic generator, and SWF trace ingestion.

mod swf;

pub use swf::{ingest_swf, CleanReport, DropReason};

use crate::model::{
    Interval, ModelError, ProblemInstance, ResourceVector, ServerPool, ServerType, VmId, VmRequest,
};
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WorkloadError {
    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),
    #[error("io error reading trace: {0}")]
    Io(String),
    #[error("malformed trace line {line}")]
    MalformedLine { line: usize },
    #[error("zero qualified records in trace")]
    ZeroQualified,
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn standard_dimensions() -> Vec<String> {
    vec!["vcpu".into(), "memory_gb".into(), "ssd_gb".into()]
}

/// The three server models: one CPU-heavy, one balanced, one memory/SSD-heavy.
pub fn server_catalog() -> Vec<ServerType> {
    [
        ("s16-32-160", [16.0, 32.0, 160.0]),
        ("s8-32-160", [8.0, 32.0, 160.0]),
        ("s8-64-320", [8.0, 64.0, 320.0]),
    ]
    .into_iter()
    .map(|(id, cap)| ServerType::new(id, ResourceVector::from_f64s(&cap).unwrap()))
    .collect()
}

/// The eight VM shapes: `(vcpu, memory GB, ssd GB)`.
pub fn vm_catalog() -> Vec<ResourceVector> {
    [
        [1.0, 3.75, 4.0],
        [2.0, 7.5, 32.0],
        [4.0, 15.0, 80.0],
        [2.0, 3.75, 32.0],
        [4.0, 7.5, 80.0],
        [8.0, 15.0, 160.0],
        [2.0, 15.25, 32.0],
        [4.0, 30.5, 80.0],
    ]
    .iter()
    .map(|d| ResourceVector::from_f64s(d).unwrap())
    .collect()
}

/// Parameters of the synthetic generator: uniform arrivals, Gaussian
/// durations, weighted choice over the VM catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_vms: usize,
    pub arrival_min: u64,
    pub arrival_max: u64,
    pub duration_mean: f64,
    pub duration_std: f64,
    /// One weight per catalog entry.
    pub vm_type_mix: Vec<f64>,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Default time distributions: arrivals U(0, 240), durations N(360, 60).
    pub fn with_defaults(n_vms: usize, seed: u64) -> Self {
        Self {
            n_vms,
            arrival_min: 0,
            arrival_max: 240,
            duration_mean: 360.0,
            duration_std: 60.0,
            vm_type_mix: vec![1.0; vm_catalog().len()],
            seed,
        }
    }

    fn validate(&self) -> Result<(), WorkloadError> {
        if self.arrival_max <= self.arrival_min {
            return Err(WorkloadError::InvalidSpec(format!(
                "arrival bound b={} must exceed a={}",
                self.arrival_max, self.arrival_min
            )));
        }
        if !(self.duration_mean > 0.0) {
            return Err(WorkloadError::InvalidSpec(
                "duration mean must be positive".into(),
            ));
        }
        if self.duration_std < 0.0 {
            return Err(WorkloadError::InvalidSpec(
                "duration sigma must be non-negative".into(),
            ));
        }
        if self.vm_type_mix.len() != vm_catalog().len()
            || self.vm_type_mix.iter().any(|&w| w < 0.0)
            || self.vm_type_mix.iter().sum::<f64>() <= 0.0
        {
            return Err(WorkloadError::InvalidSpec(
                "vm type mix must be non-negative weights over the catalog".into(),
            ));
        }
        Ok(())
    }
}

/// Draws `n_vms` requests. Arrivals are uniform reals rounded to seconds,
/// durations Gaussian rounded and truncated below at one second. The draw
/// order per request is arrival, duration, type, so outputs are stable per
/// seed.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<VmRequest>, WorkloadError> {
    spec.validate()?;
    let catalog = vm_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let duration = Normal::new(spec.duration_mean, spec.duration_std)
        .map_err(|e| WorkloadError::InvalidSpec(e.to_string()))?;
    let type_mix = WeightedIndex::new(&spec.vm_type_mix)
        .map_err(|e| WorkloadError::InvalidSpec(e.to_string()))?;
    let mut vms = Vec::with_capacity(spec.n_vms);
    for i in 0..spec.n_vms {
        let arrival = rng
            .random_range(spec.arrival_min as f64..spec.arrival_max as f64)
            .round() as u64;
        let secs = duration.sample(&mut rng).round().max(1.0) as u64;
        let type_index = type_mix.sample(&mut rng);
        vms.push(VmRequest::new(
            VmId(i as u64),
            Interval::bounded(arrival, secs).expect("secs >= 1"),
            catalog[type_index].clone(),
        ));
    }
    Ok(vms)
}

/// Wraps a request set in a problem instance with a generously sized pool:
/// `servers_per_type` instances of each catalog type, laid out in catalog
/// order. Sized at the request count, acceptance is always total.
pub fn build_instance(
    vms: Vec<VmRequest>,
    servers_per_type: u32,
) -> Result<ProblemInstance, ModelError> {
    let types = server_catalog();
    let counts = vec![servers_per_type; types.len()];
    let pool = ServerPool::blocks(types, &counts)?;
    ProblemInstance::new(standard_dimensions(), pool, vms)
}

/// Convenience: generate and wrap, one server of each type per request.
pub fn synthetic_instance(spec: &SyntheticSpec) -> Result<ProblemInstance, WorkloadError> {
    let vms = generate(spec)?;
    let per_type = vms.len().max(1) as u32;
    Ok(build_instance(vms, per_type)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_per_seed() {
        let spec = SyntheticSpec::with_defaults(50, 11);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SyntheticSpec::with_defaults(50, 12);
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn sample_mean_duration_tracks_the_distribution() {
        // CLT bound: |mean - 360| <= 3 * 60 / sqrt(10^4) = 1.8
        for seed in [7, 42] {
            let mut spec = SyntheticSpec::with_defaults(10_000, seed);
            spec.vm_type_mix = vec![1.0; vm_catalog().len()];
            let vms = generate(&spec).unwrap();
            let mean: f64 = vms
                .iter()
                .map(|v| v.window.duration().secs().unwrap() as f64)
                .sum::<f64>()
                / vms.len() as f64;
            assert!((mean - 360.0).abs() < 1.8, "seed {seed}: mean {mean}");
        }
    }

    #[test]
    fn narrow_arrival_range_raises_peak_concurrency() {
        let peak = |b: u64, seed: u64| {
            let mut spec = SyntheticSpec::with_defaults(160, seed);
            spec.arrival_max = b;
            let vms = generate(&spec).unwrap();
            let refs: Vec<_> = vms.clone();
            let t = crate::clustering::find_time_most_vms(&refs).unwrap();
            vms.iter().filter(|v| v.window.contains(t)).count()
        };
        for seed in 0..10 {
            assert!(peak(60, seed) > peak(420, seed), "seed {seed}");
        }
    }

    #[test]
    fn generated_requests_fit_the_catalog() {
        let spec = SyntheticSpec::with_defaults(64, 3);
        let instance = synthetic_instance(&spec).unwrap();
        assert_eq!(instance.vms().len(), 64);
        assert_eq!(instance.pool().len(), 3 * 64);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SyntheticSpec::with_defaults(10, 0);
        spec.arrival_max = 0;
        assert!(matches!(
            generate(&spec),
            Err(WorkloadError::InvalidSpec(_))
        ));
        let mut spec = SyntheticSpec::with_defaults(10, 0);
        spec.duration_mean = -5.0;
        assert!(generate(&spec).is_err());
        let mut spec = SyntheticSpec::with_defaults(10, 0);
        spec.vm_type_mix = vec![0.0; vm_catalog().len()];
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn catalog_matches_the_published_shapes() {
        let servers = server_catalog();
        assert_eq!(servers.len(), 3);
        assert_eq!(servers[0].capacity.to_f64s(), vec![16.0, 32.0, 160.0]);
        assert_eq!(servers[1].capacity.to_f64s(), vec![8.0, 32.0, 160.0]);
        assert_eq!(servers[2].capacity.to_f64s(), vec![8.0, 64.0, 320.0]);
        let vms = vm_catalog();
        assert_eq!(vms.len(), 8);
        assert_eq!(vms[0].to_f64s(), vec![1.0, 3.75, 4.0]);
        assert_eq!(vms[6].to_f64s(), vec![2.0, 15.25, 32.0]);
        assert_eq!(vms[7].to_f64s(), vec![4.0, 30.5, 80.0]);
    }
}
