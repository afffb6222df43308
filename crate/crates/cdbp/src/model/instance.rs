use super::{
    Interval, ModelError, ResourceVector, ServerPool, ServerType, TimePoint, VmDuration, VmId,
    VmRequest,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

/// A full placement problem: named resource dimensions, a server pool, and
/// the request set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    dimensions: Vec<String>,
    pool: ServerPool,
    vms: Vec<VmRequest>,
}

impl ProblemInstance {
    pub fn new(
        dimensions: Vec<String>,
        pool: ServerPool,
        vms: Vec<VmRequest>,
    ) -> Result<Self, ModelError> {
        let dims = dimensions.len();
        for ty in pool.types() {
            if ty.capacity.len() != dims {
                return Err(ModelError::DimensionMismatch {
                    expected: dims,
                    got: ty.capacity.len(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for vm in &vms {
            if vm.demand.len() != dims {
                return Err(ModelError::DimensionMismatch {
                    expected: dims,
                    got: vm.demand.len(),
                });
            }
            if !seen.insert(vm.id) {
                return Err(ModelError::DuplicateVmId(vm.id));
            }
            if !pool
                .types()
                .iter()
                .any(|ty| vm.demand.fits_within(&ty.capacity))
            {
                return Err(ModelError::NoCompatibleServerType(vm.id));
            }
        }
        // Every dimension some request actually uses must be positive on all
        // server types.
        for d in 0..dims {
            if vms.iter().any(|v| !v.demand.get(d).is_zero()) {
                for ty in pool.types() {
                    if ty.capacity.get(d).is_zero() {
                        return Err(ModelError::ZeroCapacityDimension {
                            type_id: ty.type_id.clone(),
                            dimension: d,
                        });
                    }
                }
            }
        }
        Ok(Self {
            dimensions,
            pool,
            vms,
        })
    }

    pub fn dimensions(&self) -> &[String] {
        &self.dimensions
    }

    pub fn pool(&self) -> &ServerPool {
        &self.pool
    }

    pub fn vms(&self) -> &[VmRequest] {
        &self.vms
    }

    pub fn vm(&self, id: VmId) -> Option<&VmRequest> {
        self.vms.iter().find(|v| v.id == id)
    }

    /// Replaces the request set, revalidating the result.
    pub fn with_vms(&self, vms: Vec<VmRequest>) -> Result<Self, ModelError> {
        Self::new(self.dimensions.clone(), self.pool.clone(), vms)
    }

    /// First instant by which all activity changes have happened: the maximum
    /// of bounded window ends and arrivals plus one. Unbounded reservations
    /// hold their level forever past this point.
    pub fn horizon(&self) -> TimePoint {
        self.vms
            .iter()
            .map(|v| v.window.end().unwrap_or(v.window.start() + 1))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    dimensions: Vec<String>,
    servers: Vec<ServerDoc>,
    vms: Vec<VmDoc>,
}

#[derive(Serialize, Deserialize)]
struct ServerDoc {
    type_id: String,
    capacity: Vec<f64>,
    count: u32,
}

#[derive(Serialize, Deserialize)]
struct VmDoc {
    id: u64,
    arrival: u64,
    duration: DurationDoc,
    demand: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DurationDoc {
    Secs(u64),
    Word(String),
}

impl ProblemInstance {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: InstanceDoc = serde_json::from_str(text)
            .map_err(|e| ModelError::InvalidInstanceFile(e.to_string()))?;
        let mut types = Vec::new();
        let mut layout = Vec::new();
        for server in &doc.servers {
            let capacity = ResourceVector::from_f64s(&server.capacity)?;
            let type_index = types
                .iter()
                .position(|t: &ServerType| t.type_id == server.type_id && t.capacity == capacity)
                .unwrap_or_else(|| {
                    types.push(ServerType::new(server.type_id.clone(), capacity.clone()));
                    types.len() - 1
                });
            layout.push((type_index, server.count));
        }
        let pool = ServerPool::from_layout(types, &layout)?;
        let mut vms = Vec::with_capacity(doc.vms.len());
        for vm in &doc.vms {
            let window = match &vm.duration {
                DurationDoc::Secs(s) => Interval::bounded(vm.arrival, *s)?,
                DurationDoc::Word(w) if w == "inf" => Interval::unbounded(vm.arrival),
                DurationDoc::Word(w) => {
                    return Err(ModelError::InvalidInstanceFile(format!(
                        "vm {}: duration must be a positive number of seconds or \"inf\", got {w:?}",
                        vm.id
                    )))
                }
            };
            vms.push(VmRequest::new(
                VmId(vm.id),
                window,
                ResourceVector::from_f64s(&vm.demand)?,
            ));
        }
        Self::new(doc.dimensions.clone(), pool, vms)
    }

    pub fn to_json(&self) -> String {
        // Run-length encode the pool so arbitrary instance orders round-trip.
        let mut servers: Vec<ServerDoc> = Vec::new();
        for inst in self.pool.instances() {
            let ty = &self.pool.types()[inst.type_index];
            match servers.last_mut() {
                Some(last) if last.type_id == ty.type_id => last.count += 1,
                _ => servers.push(ServerDoc {
                    type_id: ty.type_id.clone(),
                    capacity: ty.capacity.to_f64s(),
                    count: 1,
                }),
            }
        }
        let doc = InstanceDoc {
            dimensions: self.dimensions.clone(),
            servers,
            vms: self
                .vms
                .iter()
                .map(|vm| VmDoc {
                    id: vm.id.0,
                    arrival: vm.window.start(),
                    duration: match vm.window.duration() {
                        VmDuration::Bounded(s) => DurationDoc::Secs(s),
                        VmDuration::Unbounded => DurationDoc::Word("inf".to_string()),
                    },
                    demand: vm.demand.to_f64s(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("instance serialization cannot fail")
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io(e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()).map_err(|e| ModelError::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ProblemInstance {
        let types = vec![
            ServerType::new("large", ResourceVector::from_f64s(&[16.0, 32.0]).unwrap()),
            ServerType::new("small", ResourceVector::from_f64s(&[8.0, 32.0]).unwrap()),
        ];
        let pool = ServerPool::blocks(types, &[2, 1]).unwrap();
        let vms = vec![
            VmRequest::new(
                VmId(0),
                Interval::bounded(0, 100).unwrap(),
                ResourceVector::from_f64s(&[4.0, 3.75]).unwrap(),
            ),
            VmRequest::new(
                VmId(1),
                Interval::unbounded(40),
                ResourceVector::from_f64s(&[2.0, 15.25]).unwrap(),
            ),
        ];
        ProblemInstance::new(vec!["vcpu".into(), "memory_gb".into()], pool, vms).unwrap()
    }

    #[test]
    fn json_round_trip_is_stable() {
        let instance = sample();
        let once = instance.to_json();
        let reparsed = ProblemInstance::from_json(&once).unwrap();
        assert_eq!(reparsed, instance);
        assert_eq!(reparsed.to_json(), once);
    }

    #[test]
    fn zero_duration_rejected_at_ingestion() {
        let text = r#"{
            "dimensions": ["vcpu"],
            "servers": [{"type_id": "a", "capacity": [8.0], "count": 1}],
            "vms": [{"id": 0, "arrival": 0, "duration": 0, "demand": [1.0]}]
        }"#;
        assert_eq!(
            ProblemInstance::from_json(text),
            Err(ModelError::ZeroDuration)
        );
    }

    #[test]
    fn unknown_duration_word_rejected() {
        let text = r#"{
            "dimensions": ["vcpu"],
            "servers": [{"type_id": "a", "capacity": [8.0], "count": 1}],
            "vms": [{"id": 0, "arrival": 0, "duration": "forever", "demand": [1.0]}]
        }"#;
        assert!(matches!(
            ProblemInstance::from_json(text),
            Err(ModelError::InvalidInstanceFile(_))
        ));
    }

    #[test]
    fn incompatible_vm_rejected() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[8.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types, &[1]).unwrap();
        let vm = VmRequest::new(
            VmId(0),
            Interval::bounded(0, 10).unwrap(),
            ResourceVector::from_f64s(&[9.0]).unwrap(),
        );
        assert_eq!(
            ProblemInstance::new(vec!["vcpu".into()], pool, vec![vm]),
            Err(ModelError::NoCompatibleServerType(VmId(0)))
        );
    }

    #[test]
    fn horizon_covers_all_events() {
        let instance = sample();
        assert_eq!(instance.horizon(), 100);
    }
}
