use super::ModelError;

/// An instant, in whole seconds from the start of the trace.
pub type TimePoint = u64;

/// Length of a request's execution window.
///
/// `Unbounded` is a sentinel for requests whose termination is not known at
/// arrival; their resources stay reserved indefinitely. The derive order
/// makes `Unbounded` compare greater than every bounded duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VmDuration {
    Bounded(u64),
    Unbounded,
}

impl VmDuration {
    pub fn is_unbounded(self) -> bool {
        matches!(self, VmDuration::Unbounded)
    }

    /// Seconds for bounded durations, `None` otherwise.
    pub fn secs(self) -> Option<u64> {
        match self {
            VmDuration::Bounded(s) => Some(s),
            VmDuration::Unbounded => None,
        }
    }
}

/// Half-open activity span `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    start: TimePoint,
    duration: VmDuration,
}

impl Interval {
    /// A span of `secs` seconds. Zero-length spans are rejected; under
    /// half-open semantics they would reserve nothing.
    pub fn bounded(start: TimePoint, secs: u64) -> Result<Self, ModelError> {
        if secs == 0 {
            return Err(ModelError::ZeroDuration);
        }
        Ok(Self {
            start,
            duration: VmDuration::Bounded(secs),
        })
    }

    pub fn unbounded(start: TimePoint) -> Self {
        Self {
            start,
            duration: VmDuration::Unbounded,
        }
    }

    pub fn start(&self) -> TimePoint {
        self.start
    }

    pub fn duration(&self) -> VmDuration {
        self.duration
    }

    /// Exclusive end, `None` when the span never ends.
    pub fn end(&self) -> Option<TimePoint> {
        self.duration.secs().map(|s| self.start + s)
    }

    pub fn contains(&self, t: TimePoint) -> bool {
        t >= self.start && self.end().map_or(true, |e| t < e)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        let before = |start: TimePoint, end: Option<TimePoint>| end.map_or(true, |e| start < e);
        before(self.start, other.end()) && before(other.start, self.end())
    }

    /// Common sub-span of two intervals, if any.
    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = match (self.end(), other.end()) {
            (None, None) => None,
            (Some(e), None) | (None, Some(e)) => Some(e),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        match end {
            None => Some(Interval::unbounded(start)),
            Some(e) if e > start => Some(Interval {
                start,
                duration: VmDuration::Bounded(e - start),
            }),
            Some(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_open_spans_do_not_touch() {
        let a = Interval::bounded(0, 100).unwrap();
        let b = Interval::bounded(100, 60).unwrap();
        assert!(!a.overlaps(&b));
        assert!(!a.contains(100));
        assert!(a.contains(99));
    }

    #[test]
    fn unbounded_overlaps_everything_after_arrival() {
        let open = Interval::unbounded(50);
        assert!(open.overlaps(&Interval::bounded(500, 1).unwrap()));
        assert!(open.overlaps(&Interval::bounded(0, 51).unwrap()));
        assert!(!open.overlaps(&Interval::bounded(0, 50).unwrap()));
        assert!(open.contains(1_000_000));
    }

    #[test]
    fn zero_duration_rejected() {
        assert_eq!(Interval::bounded(5, 0), Err(ModelError::ZeroDuration));
    }

    #[test]
    fn intersection_is_symmetric_and_half_open() {
        let a = Interval::bounded(0, 10).unwrap();
        let b = Interval::bounded(8, 10).unwrap();
        let i = a.intersection(&b).unwrap();
        assert_eq!((i.start(), i.end()), (8, Some(10)));
        assert_eq!(a.intersection(&b), b.intersection(&a));
        let c = Interval::bounded(10, 5).unwrap();
        assert!(a.intersection(&c).is_none());
    }

    #[test]
    fn unbounded_sorts_above_any_bounded_duration() {
        assert!(VmDuration::Unbounded > VmDuration::Bounded(u64::MAX));
    }
}
