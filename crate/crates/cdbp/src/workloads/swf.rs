//! Standard Workload Format ingestion.
//!
//! SWF job logs carry a `;`-prefixed comment header followed by one job per
//! line with 18 whitespace-separated numeric fields. Only four fields feed
//! the placement model: submit time (2), run time (4), requested processors
//! (8) and requested memory in MB (10); the status field (11) gates
//! qualification. Each qualified job is snapped to the cheapest catalog VM
//! shape that dominates its scaled request.

use super::{server_catalog, standard_dimensions, vm_catalog, WorkloadError};
use crate::model::{Interval, ResourceVector, VmId, VmRequest};
use std::collections::BTreeMap;
use std::path::Path;

/// Why a parsed job line was not turned into a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DropReason {
    /// Run time missing (negative) or zero.
    MissingDuration,
    /// Requested processor count missing or non-positive.
    MissingResources,
    /// Job did not complete successfully.
    FailedStatus,
    /// Submit time missing (negative).
    MissingArrival,
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let text = match self {
            DropReason::MissingDuration => "missing duration",
            DropReason::MissingResources => "missing resources",
            DropReason::FailedStatus => "failed status",
            DropReason::MissingArrival => "missing arrival",
        };
        f.write_str(text)
    }
}

/// Ledger of what the cleaning pass did.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CleanReport {
    /// Non-comment, non-blank lines seen.
    pub job_lines: usize,
    /// Lines passing every cleaning rule.
    pub qualified: usize,
    /// Requests actually returned (first `limit` qualified).
    pub emitted: usize,
    /// Qualified records beyond the limit.
    pub truncated: usize,
    /// Cleaning drops by reason.
    pub dropped: BTreeMap<DropReason, usize>,
    /// Requests larger than every catalog shape, capped to the largest.
    pub capped_to_largest: usize,
}

impl CleanReport {
    pub fn total_dropped(&self) -> usize {
        self.dropped.values().sum()
    }

    /// Every job line is accounted for exactly once.
    pub fn is_consistent(&self) -> bool {
        self.total_dropped() + self.qualified == self.job_lines
            && self.emitted + self.truncated == self.qualified
    }
}

struct QualifiedJob {
    submit: u64,
    run_secs: u64,
    processors: u64,
    memory_mb: f64,
}

/// Normalized size of a catalog shape, used to pick the cheapest dominating
/// type and the largest fallback.
fn shape_size(shape: &ResourceVector, maxima: &[f64]) -> f64 {
    shape
        .to_f64s()
        .iter()
        .zip(maxima)
        .map(|(v, m)| v / m)
        .sum()
}

/// Reads an SWF file and returns the first `limit` qualified records mapped
/// onto catalog VM shapes, arrivals rebased so the earliest emitted request
/// starts at zero.
pub fn ingest_swf(path: &Path, limit: usize) -> Result<(Vec<VmRequest>, CleanReport), WorkloadError> {
    let text = std::fs::read_to_string(path).map_err(|e| WorkloadError::Io(e.to_string()))?;
    let mut report = CleanReport::default();
    let mut jobs: Vec<QualifiedJob> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        report.job_lines += 1;
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| WorkloadError::MalformedLine { line: idx + 1 })?;
        if fields.len() != 18 {
            return Err(WorkloadError::MalformedLine { line: idx + 1 });
        }
        let submit = fields[1];
        let run_time = fields[3];
        let processors = fields[7];
        let memory_mb = fields[9];
        let status = fields[10];

        let drop = |report: &mut CleanReport, reason: DropReason| {
            *report.dropped.entry(reason).or_default() += 1;
        };
        if run_time <= 0.0 {
            drop(&mut report, DropReason::MissingDuration);
            continue;
        }
        if processors <= 0.0 {
            drop(&mut report, DropReason::MissingResources);
            continue;
        }
        if status != 1.0 {
            drop(&mut report, DropReason::FailedStatus);
            continue;
        }
        if submit < 0.0 {
            drop(&mut report, DropReason::MissingArrival);
            continue;
        }
        report.qualified += 1;
        if jobs.len() < limit {
            jobs.push(QualifiedJob {
                submit: submit.round() as u64,
                run_secs: (run_time.round() as u64).max(1),
                processors: processors.round() as u64,
                memory_mb: memory_mb.max(0.0),
            });
        } else {
            report.truncated += 1;
        }
    }
    if report.qualified == 0 {
        return Err(WorkloadError::ZeroQualified);
    }
    report.emitted = jobs.len();

    let catalog = vm_catalog();
    let dims = standard_dimensions().len();
    let maxima: Vec<f64> = (0..dims)
        .map(|d| {
            catalog
                .iter()
                .map(|s| s.to_f64s()[d])
                .fold(f64::MIN, f64::max)
        })
        .collect();
    let smallest_ssd = catalog
        .iter()
        .map(|s| s.to_f64s()[2])
        .fold(f64::MAX, f64::min);
    let largest = catalog
        .iter()
        .max_by(|a, b| {
            shape_size(a, &maxima)
                .partial_cmp(&shape_size(b, &maxima))
                .unwrap()
        })
        .expect("catalog is non-empty")
        .clone();

    let base = jobs.iter().map(|j| j.submit).min().unwrap_or(0);
    let mut vms = Vec::with_capacity(jobs.len());
    for (i, job) in jobs.iter().enumerate() {
        let request = [
            job.processors as f64,
            job.memory_mb / 1024.0,
            smallest_ssd,
        ];
        let demand = catalog
            .iter()
            .filter(|shape| {
                shape
                    .to_f64s()
                    .iter()
                    .zip(&request)
                    .all(|(have, want)| have + 1e-9 >= *want)
            })
            .min_by(|a, b| {
                shape_size(a, &maxima)
                    .partial_cmp(&shape_size(b, &maxima))
                    .unwrap()
            })
            .cloned()
            .unwrap_or_else(|| {
                report.capped_to_largest += 1;
                largest.clone()
            });
        vms.push(VmRequest::new(
            VmId(i as u64),
            Interval::bounded(job.submit - base, job.run_secs).expect("run_secs >= 1"),
            demand,
        ));
    }
    debug_assert!(report.is_consistent());
    Ok((vms, report))
}

/// Builds an instance around ingested trace requests with a generous pool.
pub fn swf_instance(
    path: &Path,
    limit: usize,
) -> Result<(crate::model::ProblemInstance, CleanReport), WorkloadError> {
    let (vms, report) = ingest_swf(path, limit)?;
    let per_type = vms.len().max(1) as u32;
    let types = server_catalog();
    let counts = vec![per_type; types.len()];
    let pool = crate::model::ServerPool::blocks(types, &counts)?;
    let instance = crate::model::ProblemInstance::new(standard_dimensions(), pool, vms)?;
    Ok((instance, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_swf(lines: &[String]) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "; Synthetic test trace").unwrap();
        writeln!(file, "; Version: 2").unwrap();
        for line in lines {
            writeln!(file, "{line}").unwrap();
        }
        file.flush().unwrap();
        file
    }

    fn job_line(id: usize, submit: i64, run: i64, procs: i64, mem_mb: i64, status: i64) -> String {
        // 18 fields; unused ones carry -1 like real traces.
        format!(
            "{id} {submit} -1 {run} {procs} -1 -1 {procs} {run} {mem_mb} {status} 1 1 1 1 -1 -1 -1"
        )
    }

    #[test]
    fn empty_file_yields_zero_qualified_error() {
        let file = write_swf(&[]);
        assert_eq!(
            ingest_swf(file.path(), 500).unwrap_err(),
            WorkloadError::ZeroQualified
        );
    }

    #[test]
    fn unknown_run_time_is_dropped_as_missing_duration() {
        let file = write_swf(&[
            job_line(1, 0, -1, 4, 4096, 1),
            job_line(2, 10, 100, 4, 4096, 1),
        ]);
        let (vms, report) = ingest_swf(file.path(), 500).unwrap();
        assert_eq!(vms.len(), 1);
        assert_eq!(report.dropped[&DropReason::MissingDuration], 1);
        assert!(report.is_consistent());
    }

    #[test]
    fn limit_truncates_after_qualification() {
        let lines: Vec<String> = (0..30)
            .map(|i| job_line(i, 100 + i as i64 * 10, 50, 2, 2048, 1))
            .collect();
        let file = write_swf(&lines);
        let (vms, report) = ingest_swf(file.path(), 20).unwrap();
        assert_eq!(vms.len(), 20);
        assert_eq!(report.truncated, 10);
        assert_eq!(report.qualified, 30);
        assert!(report.is_consistent());
        // rebased to zero, order preserving
        assert_eq!(vms[0].window.start(), 0);
        assert_eq!(vms[1].window.start(), 10);
    }

    #[test]
    fn requests_snap_to_the_cheapest_dominating_shape() {
        // 4 procs, 14.5 GB -> (4, 15, 80); 1 proc, 1 GB -> (1, 3.75, 4)
        let file = write_swf(&[
            job_line(1, 0, 100, 4, 14848, 1),
            job_line(2, 5, 100, 1, 1024, 1),
        ]);
        let (vms, _) = ingest_swf(file.path(), 500).unwrap();
        assert_eq!(vms[0].demand.to_f64s(), vec![4.0, 15.0, 80.0]);
        assert_eq!(vms[1].demand.to_f64s(), vec![1.0, 3.75, 4.0]);
    }

    #[test]
    fn oversized_requests_cap_to_the_largest_shape() {
        let file = write_swf(&[job_line(1, 0, 100, 64, 262144, 1)]);
        let (vms, report) = ingest_swf(file.path(), 500).unwrap();
        assert_eq!(report.capped_to_largest, 1);
        assert_eq!(vms[0].demand.to_f64s(), vec![8.0, 15.0, 160.0]);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let file = write_swf(&[
            job_line(1, 0, 100, 4, 4096, 1),
            "1 2 three 4".to_string(),
        ]);
        assert_eq!(
            ingest_swf(file.path(), 500).unwrap_err(),
            WorkloadError::MalformedLine { line: 4 }
        );
    }

    #[test]
    fn failed_and_cancelled_jobs_are_dropped() {
        let file = write_swf(&[
            job_line(1, 0, 100, 4, 4096, 0),
            job_line(2, 0, 100, 4, 4096, 5),
            job_line(3, 0, 100, 4, 4096, 1),
        ]);
        let (vms, report) = ingest_swf(file.path(), 500).unwrap();
        assert_eq!(vms.len(), 1);
        assert_eq!(report.dropped[&DropReason::FailedStatus], 2);
    }
}
