#![allow(dead_code)]

use evasilab::graph::edge_count;
use evasilab::{ClassTable, Property};

/// Classes of the size-11 nonevasive property on five vertices.
pub const E_CLASSES: [usize; 11] = [4, 7, 8, 9, 10, 11, 14, 16, 18, 22, 25];

pub fn e_property() -> Property {
    Property::from_ids(ClassTable::shared(5).unwrap(), E_CLASSES).unwrap()
}

/// Game value computed on labeled positions directly: no isomorphism
/// reduction, no shared tables, only a memo keyed by the raw position.
pub struct RawOracle {
    m: usize,
    inside: Vec<bool>,
    memo: Vec<u8>,
}

const UNSET: u8 = u8::MAX;

impl RawOracle {
    pub fn new(property: &Property) -> Self {
        let n = property.n();
        let classes = ClassTable::shared(n).unwrap();
        let m = edge_count(n);
        let inside = (0..1u32 << m)
            .map(|g| property.contains(classes.class_of_mask(g as u16)))
            .collect();
        RawOracle {
            m,
            inside,
            memo: vec![UNSET; 1 << (2 * m)],
        }
    }

    /// Worst-case number of further questions from the given labeled
    /// position under optimal play by both sides.
    pub fn value(&mut self, present: u16, asked: u16) -> u8 {
        let key = ((asked as usize) << self.m) | present as usize;
        if self.memo[key] != UNSET {
            return self.memo[key];
        }
        let full = ((1u32 << self.m) - 1) as u16;
        let unknown = full & !asked;
        let v = if self.decided(present, unknown) {
            0
        } else {
            let mut best = u8::MAX;
            for e in 0..self.m {
                if unknown >> e & 1 == 1 {
                    let bit = 1u16 << e;
                    let a = self.value(present, asked | bit);
                    let p = self.value(present | bit, asked | bit);
                    best = best.min(1 + a.max(p));
                }
            }
            best
        };
        self.memo[key] = v;
        v
    }

    pub fn depth(&mut self) -> usize {
        self.value(0, 0) as usize
    }

    fn decided(&self, present: u16, unknown: u16) -> bool {
        let first = self.inside[present as usize];
        // Walk every subset of the unknown edges.
        let mut sub = unknown;
        loop {
            if self.inside[(present | sub) as usize] != first {
                return false;
            }
            if sub == 0 {
                return true;
            }
            sub = (sub - 1) & unknown;
        }
    }
}

pub fn raw_depth(property: &Property) -> usize {
    RawOracle::new(property).depth()
}
