use super::{ModelError, ResourceVector};

/// A server model: capacity vector shared by all instances of the type.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerType {
    pub type_id: String,
    pub capacity: ResourceVector,
}

impl ServerType {
    pub fn new(type_id: impl Into<String>, capacity: ResourceVector) -> Self {
        Self {
            type_id: type_id.into(),
            capacity,
        }
    }
}

/// Identity of one physical server within a pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId(pub u32);

impl std::fmt::Display for InstanceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerInstance {
    pub id: InstanceId,
    pub type_index: usize,
}

/// The ordered set of server instances available to a solver.
///
/// Order matters: first-fit scans instances in pool order, and instance ids
/// are assigned positionally at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerPool {
    types: Vec<ServerType>,
    instances: Vec<ServerInstance>,
}

impl ServerPool {
    /// Builds a pool from a layout of `(type index, count)` runs, in order.
    pub fn from_layout(types: Vec<ServerType>, layout: &[(usize, u32)]) -> Result<Self, ModelError> {
        let mut instances = Vec::new();
        for &(type_index, count) in layout {
            if type_index >= types.len() {
                return Err(ModelError::InvalidInstanceFile(format!(
                    "layout references unknown server type index {type_index}"
                )));
            }
            for _ in 0..count {
                instances.push(ServerInstance {
                    id: InstanceId(instances.len() as u32),
                    type_index,
                });
            }
        }
        Ok(Self { types, instances })
    }

    /// One contiguous block of `count` instances per type, in type order.
    pub fn blocks(types: Vec<ServerType>, counts: &[u32]) -> Result<Self, ModelError> {
        let layout: Vec<(usize, u32)> = counts.iter().copied().enumerate().collect();
        Self::from_layout(types, &layout)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn types(&self) -> &[ServerType] {
        &self.types
    }

    pub fn instances(&self) -> &[ServerInstance] {
        &self.instances
    }

    pub fn instance(&self, id: InstanceId) -> Result<&ServerInstance, ModelError> {
        self.instances
            .get(id.0 as usize)
            .ok_or(ModelError::UnknownInstance(id.0))
    }

    pub fn capacity_of(&self, id: InstanceId) -> Result<&ResourceVector, ModelError> {
        let inst = self.instance(id)?;
        Ok(&self.types[inst.type_index].capacity)
    }

    /// Instance ids of one type, in pool order.
    pub fn instances_of_type(&self, type_index: usize) -> Vec<InstanceId> {
        self.instances
            .iter()
            .filter(|i| i.type_index == type_index)
            .map(|i| i.id)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn types() -> Vec<ServerType> {
        vec![
            ServerType::new("a", ResourceVector::from_f64s(&[16.0]).unwrap()),
            ServerType::new("b", ResourceVector::from_f64s(&[8.0]).unwrap()),
        ]
    }

    #[test]
    fn blocks_assign_positional_ids() {
        let pool = ServerPool::blocks(types(), &[2, 3]).unwrap();
        assert_eq!(pool.len(), 5);
        assert_eq!(pool.instances()[0].type_index, 0);
        assert_eq!(pool.instances()[4].type_index, 1);
        assert_eq!(pool.instances()[4].id, InstanceId(4));
        assert_eq!(pool.instances_of_type(1), vec![InstanceId(2), InstanceId(3), InstanceId(4)]);
    }

    #[test]
    fn layout_allows_interleaving() {
        let pool = ServerPool::from_layout(types(), &[(1, 1), (0, 1), (1, 1)]).unwrap();
        let order: Vec<usize> = pool.instances().iter().map(|i| i.type_index).collect();
        assert_eq!(order, vec![1, 0, 1]);
    }
}
