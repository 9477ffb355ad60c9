//! Party state: role, key material, split record table, optional enclave.

use crate::boosting::dataset::PartyId;
use crate::boosting::tree::RecordId;
use crate::crypto::paillier::{PaillierPublic, PaillierSecret};
use crate::crypto::Sealer;
use crate::error::{Error, Result};
use crate::federation::enclave::Enclave;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Active,
    Passive,
}

/// Key material visible to the party's host process. Enclave-held keys live
/// in [`Enclave`] instead; tests introspect both to assert the per-mode
/// key placement.
#[derive(Debug, Default)]
pub struct KeyStore {
    pub paillier_pk: Option<PaillierPublic>,
    pub paillier_sk: Option<PaillierSecret>,
    pub sym: Option<Sealer>,
}

impl KeyStore {
    pub fn has_sym_key(&self) -> bool {
        self.sym.is_some()
    }
}

/// Private split parameters stored under a record id at the owning party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRecord {
    pub feature: usize,
    pub threshold_index: usize,
    pub threshold_value: f64,
}

#[derive(Debug, Default)]
pub struct SplitRecordTable {
    records: Vec<SplitRecord>,
}

impl SplitRecordTable {
    pub fn add(&mut self, record: SplitRecord) -> RecordId {
        self.records.push(record);
        (self.records.len() - 1) as RecordId
    }

    pub fn get(&self, id: RecordId) -> Result<&SplitRecord> {
        self.records.get(id as usize).ok_or(Error::UnknownRecord(id))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug)]
pub struct PartyState {
    pub id: PartyId,
    pub role: Role,
    pub enclave: Option<Enclave>,
    pub keys: KeyStore,
    pub records: SplitRecordTable,
}

impl PartyState {
    pub fn new(id: PartyId, role: Role) -> Self {
        PartyState {
            id,
            role,
            enclave: None,
            keys: KeyStore::default(),
            records: SplitRecordTable::default(),
        }
    }

    pub fn enclave(&self) -> Result<&Enclave> {
        self.enclave
            .as_ref()
            .ok_or_else(|| Error::Config(format!("party {} has no enclave", self.id)))
    }

    pub fn enclave_mut(&mut self) -> Result<&mut Enclave> {
        self.enclave
            .as_mut()
            .ok_or_else(|| Error::Config(format!("party {} has no enclave", self.id)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_table_resolves_in_insertion_order() {
        let mut table = SplitRecordTable::default();
        let a = table.add(SplitRecord { feature: 1, threshold_index: 2, threshold_value: 3.0 });
        let b = table.add(SplitRecord { feature: 4, threshold_index: 5, threshold_value: 6.0 });
        assert_eq!(a, 0);
        assert_eq!(b, 1);
        assert_eq!(table.get(a).unwrap().feature, 1);
        assert!(matches!(table.get(9), Err(Error::UnknownRecord(9))));
    }
}
