//! The exchange zone: named shared slots holding the outputs of every module.
//!
//! Each slot has exactly one producer (claimed on first write); any other
//! writer is rejected. Slot updates are atomic with respect to readers, and
//! the zone may be read concurrently while the single producer writes.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::time::TimeVector;

#[derive(Debug, Error, PartialEq)]
pub enum ZoneError {
    #[error("slot {slot:?} is produced by {owner:?}, write by {writer:?} rejected")]
    NotProducer { slot: String, owner: String, writer: String },
    #[error("unknown slot {0:?}")]
    UnknownSlot(String),
    #[error("non-finite value {value} written to slot {slot:?} by {producer:?}")]
    NonFinite { slot: String, producer: String, value: f64 },
    #[error("slot {slot:?} holds a {actual}, expected a {expected}")]
    KindMismatch { slot: String, expected: SlotKind, actual: SlotKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    Scalar,
    TimeVector,
}

impl std::fmt::Display for SlotKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlotKind::Scalar => write!(f, "scalar"),
            SlotKind::TimeVector => write!(f, "time-vector"),
        }
    }
}

/// Value stored in a slot. Time-vectors are shared immutably.
#[derive(Debug, Clone, PartialEq)]
pub enum SlotValue {
    Scalar(f64),
    TimeVector(Arc<TimeVector>),
}

impl SlotValue {
    pub fn kind(&self) -> SlotKind {
        match self {
            SlotValue::Scalar(_) => SlotKind::Scalar,
            SlotValue::TimeVector(_) => SlotKind::TimeVector,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            SlotValue::Scalar(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_time_vector(&self) -> Option<&Arc<TimeVector>> {
        match self {
            SlotValue::TimeVector(tv) => Some(tv),
            _ => None,
        }
    }
}

impl From<f64> for SlotValue {
    fn from(v: f64) -> Self {
        SlotValue::Scalar(v)
    }
}

impl From<TimeVector> for SlotValue {
    fn from(tv: TimeVector) -> Self {
        SlotValue::TimeVector(Arc::new(tv))
    }
}

#[derive(Debug, Clone)]
pub struct SlotEntry {
    pub value: SlotValue,
    pub producer: String,
    pub last_write_tick: u64,
}

/// Shared table of module outputs.
#[derive(Debug, Default)]
pub struct ExchangeZone {
    slots: RwLock<HashMap<String, SlotEntry>>,
}

impl ExchangeZone {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes a value to a slot. The first writer claims the slot; later
    /// writes by anyone else fail. Scalar values must be finite.
    pub fn write(
        &self,
        slot: &str,
        value: impl Into<SlotValue>,
        producer: &str,
        tick: u64,
    ) -> Result<(), ZoneError> {
        let value = value.into();
        if let SlotValue::Scalar(v) = value {
            if !v.is_finite() {
                return Err(ZoneError::NonFinite {
                    slot: slot.to_string(),
                    producer: producer.to_string(),
                    value: v,
                });
            }
        }
        let mut slots = self.slots.write().unwrap();
        if let Some(entry) = slots.get_mut(slot) {
            if entry.producer != producer {
                return Err(ZoneError::NotProducer {
                    slot: slot.to_string(),
                    owner: entry.producer.clone(),
                    writer: producer.to_string(),
                });
            }
            entry.value = value;
            entry.last_write_tick = tick;
        } else {
            slots.insert(
                slot.to_string(),
                SlotEntry { value, producer: producer.to_string(), last_write_tick: tick },
            );
        }
        Ok(())
    }

    /// Returns the most recently written value of a slot and its write tick.
    pub fn read(&self, slot: &str) -> Result<(SlotValue, u64), ZoneError> {
        let slots = self.slots.read().unwrap();
        slots
            .get(slot)
            .map(|e| (e.value.clone(), e.last_write_tick))
            .ok_or_else(|| ZoneError::UnknownSlot(slot.to_string()))
    }

    pub fn read_scalar(&self, slot: &str) -> Result<f64, ZoneError> {
        let (v, _) = self.read(slot)?;
        v.as_scalar().ok_or_else(|| ZoneError::KindMismatch {
            slot: slot.to_string(),
            expected: SlotKind::Scalar,
            actual: v.kind(),
        })
    }

    pub fn read_time_vector(&self, slot: &str) -> Result<Arc<TimeVector>, ZoneError> {
        let (v, _) = self.read(slot)?;
        match v {
            SlotValue::TimeVector(tv) => Ok(tv),
            other => Err(ZoneError::KindMismatch {
                slot: slot.to_string(),
                expected: SlotKind::TimeVector,
                actual: other.kind(),
            }),
        }
    }

    pub fn contains(&self, slot: &str) -> bool {
        self.slots.read().unwrap().contains_key(slot)
    }

    pub fn producer_of(&self, slot: &str) -> Option<String> {
        self.slots.read().unwrap().get(slot).map(|e| e.producer.clone())
    }

    pub fn slot_names(&self) -> Vec<String> {
        let mut names: Vec<_> = self.slots.read().unwrap().keys().cloned().collect();
        names.sort();
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_your_write() {
        let z = ExchangeZone::new();
        z.write("s", 7.0, "A", 3).unwrap();
        let (v, tick) = z.read("s").unwrap();
        assert_eq!(v.as_scalar(), Some(7.0));
        assert_eq!(tick, 3);
    }

    #[test]
    fn single_writer_rule() {
        let z = ExchangeZone::new();
        z.write("s", 1.0, "A", 0).unwrap();
        let err = z.write("s", 2.0, "B", 1).unwrap_err();
        assert!(matches!(err, ZoneError::NotProducer { .. }));
        // owner can keep writing
        z.write("s", 3.0, "A", 2).unwrap();
        assert_eq!(z.read_scalar("s").unwrap(), 3.0);
    }

    #[test]
    fn unknown_slot() {
        let z = ExchangeZone::new();
        assert_eq!(z.read("nope").unwrap_err(), ZoneError::UnknownSlot("nope".into()));
    }

    #[test]
    fn non_finite_rejected() {
        let z = ExchangeZone::new();
        assert!(matches!(z.write("s", f64::NAN, "A", 0), Err(ZoneError::NonFinite { .. })));
        assert!(matches!(z.write("s", f64::INFINITY, "A", 0), Err(ZoneError::NonFinite { .. })));
    }

    #[test]
    fn latest_write_wins() {
        let z = ExchangeZone::new();
        for tick in 0..10u64 {
            z.write("s", tick as f64, "A", tick).unwrap();
        }
        let (v, tick) = z.read("s").unwrap();
        assert_eq!(tick, 9);
        assert_eq!(v.as_scalar(), Some(9.0));
    }

    #[test]
    fn concurrent_readers_while_writing() {
        use std::sync::Arc;
        let z = Arc::new(ExchangeZone::new());
        z.write("s", 0.0, "A", 0).unwrap();
        let readers: Vec<_> = (0..4)
            .map(|_| {
                let z = Arc::clone(&z);
                std::thread::spawn(move || {
                    for _ in 0..1000 {
                        let v = z.read_scalar("s").unwrap();
                        assert!((0.0..1000.0).contains(&v));
                    }
                })
            })
            .collect();
        for tick in 1..1000u64 {
            z.write("s", tick as f64, "A", tick).unwrap();
        }
        for r in readers {
            r.join().unwrap();
        }
    }
}
