use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

/// A queued URL. Higher priority pops first; equal priorities pop in
/// insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierEntry {
    pub url: String,
    pub priority: f64,
    pub sequence: u64,
}

#[derive(Debug)]
struct HeapItem(FrontierEntry);

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .priority
            .total_cmp(&other.0.priority)
            .then_with(|| other.0.sequence.cmp(&self.0.sequence))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushOutcome {
    Inserted,
    /// Already queued at a lower priority; priority raised, sequence kept.
    Raised,
    /// Already queued at an equal or higher priority.
    Unchanged,
}

/// Max-priority URL queue with FIFO tie-breaking and at most one entry per
/// URL.
///
/// Raising a queued URL's priority pushes a fresh heap item; the outdated
/// one is dropped lazily when it surfaces.
#[derive(Debug, Default)]
pub struct Frontier {
    heap: BinaryHeap<HeapItem>,
    members: HashMap<String, (f64, u64)>,
    next_sequence: u64,
}

fn sanitize(priority: f64) -> f64 {
    if priority.is_nan() {
        f64::MIN
    } else {
        priority.clamp(f64::MIN, f64::MAX)
    }
}

impl Frontier {
    pub fn new() -> Frontier {
        Frontier::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, url: &str) -> bool {
        self.members.contains_key(url)
    }

    pub fn priority_of(&self, url: &str) -> Option<f64> {
        self.members.get(url).map(|(p, _)| *p)
    }

    /// Non-finite priorities are clamped into the finite range.
    pub fn push(&mut self, url: &str, priority: f64) -> PushOutcome {
        let priority = sanitize(priority);
        let (entry, outcome) = match self.members.get_mut(url) {
            Some((current, _)) if *current >= priority => return PushOutcome::Unchanged,
            Some((current, seq)) => {
                *current = priority;
                (
                    FrontierEntry {
                        url: url.to_string(),
                        priority,
                        sequence: *seq,
                    },
                    PushOutcome::Raised,
                )
            }
            None => {
                let seq = self.next_sequence;
                self.next_sequence += 1;
                self.members.insert(url.to_string(), (priority, seq));
                (
                    FrontierEntry {
                        url: url.to_string(),
                        priority,
                        sequence: seq,
                    },
                    PushOutcome::Inserted,
                )
            }
        };
        self.heap.push(HeapItem(entry));
        outcome
    }

    pub fn pop(&mut self) -> Option<FrontierEntry> {
        while let Some(HeapItem(entry)) = self.heap.pop() {
            let live = self
                .members
                .get(&entry.url)
                .is_some_and(|&(p, s)| s == entry.sequence && p.to_bits() == entry.priority.to_bits());
            if live {
                self.members.remove(&entry.url);
                return Some(entry);
            }
        }
        None
    }

    /// Queued entries in pop order, without consuming them.
    pub fn entries(&self) -> Vec<FrontierEntry> {
        let mut out: Vec<FrontierEntry> = self
            .members
            .iter()
            .map(|(url, &(priority, sequence))| FrontierEntry {
                url: url.clone(),
                priority,
                sequence,
            })
            .collect();
        out.sort_by(|a, b| {
            b.priority
                .total_cmp(&a.priority)
                .then_with(|| a.sequence.cmp(&b.sequence))
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fifo_among_equal() {
        let mut f = Frontier::new();
        f.push("a", 1.0);
        f.push("b", 1.0);
        f.push("c", 2.0);
        f.push("d", 1.0);
        let order: Vec<String> = std::iter::from_fn(|| f.pop()).map(|e| e.url).collect();
        assert_eq!(order, ["c", "a", "b", "d"]);
    }

    #[test]
    fn raise_keeps_sequence() {
        let mut f = Frontier::new();
        f.push("a", 0.5);
        f.push("b", 0.9);
        assert_eq!(f.push("a", 0.9), PushOutcome::Raised);
        assert_eq!(f.push("a", 0.1), PushOutcome::Unchanged);
        assert_eq!(f.len(), 2);
        // same priority now, "a" was inserted first
        assert_eq!(f.pop().unwrap().url, "a");
        assert_eq!(f.pop().unwrap().url, "b");
        assert!(f.pop().is_none());
    }

    #[derive(Debug, Clone)]
    enum Op {
        Push(u8, u8),
        Pop,
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            3 => (0u8..12, 0u8..5).prop_map(|(u, p)| Op::Push(u, p)),
            1 => Just(Op::Pop),
        ]
    }

    proptest! {
        // Oracle: a plain list sorted on every pop.
        #[test]
        fn matches_sort_oracle(ops in prop::collection::vec(op(), 0..200)) {
            let mut f = Frontier::new();
            let mut oracle: Vec<(String, f64, u64)> = Vec::new();
            let mut seq = 0u64;
            for op in ops {
                match op {
                    Op::Push(u, p) => {
                        let url = format!("u{u}");
                        let p = p as f64 / 4.0;
                        f.push(&url, p);
                        match oracle.iter_mut().find(|e| e.0 == url) {
                            Some(e) => if p > e.1 { e.1 = p },
                            None => { oracle.push((url, p, seq)); seq += 1; }
                        }
                    }
                    Op::Pop => {
                        oracle.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
                        let expected = if oracle.is_empty() { None } else { Some(oracle.remove(0)) };
                        let got = f.pop();
                        prop_assert_eq!(got.map(|e| (e.url, e.priority)), expected.map(|e| (e.0, e.1)));
                    }
                }
                prop_assert_eq!(f.len(), oracle.len());
            }
        }
    }
}
