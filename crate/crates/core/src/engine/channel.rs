//! Shared radio medium: who is transmitting, who hears whom, and which
//! receptions were spoiled by overlap.

use std::collections::BTreeMap;

use crate::scenario::CollisionMode;

/// One transmission on the air.
#[derive(Debug, Clone)]
pub struct Airing {
    pub sender: usize,
    /// Nodes in range of the sender when it started.
    pub hearers: Vec<usize>,
    corrupted: Vec<bool>,
}

impl Airing {
    /// Whether `node` heard the whole transmission undisturbed.
    pub fn clean(&self, node: usize) -> bool {
        self.hearers.iter().position(|&h| h == node).is_some_and(|i| !self.corrupted[i])
    }

    fn spoil(&mut self, node: usize) {
        if let Some(i) = self.hearers.iter().position(|&h| h == node) {
            self.corrupted[i] = true;
        }
    }
}

#[derive(Debug)]
pub struct Channel {
    mode: CollisionMode,
    next_id: u64,
    active: BTreeMap<u64, Airing>,
    /// Active transmissions each node is hearing.
    hearing: Vec<Vec<u64>>,
    sending: Vec<Option<u64>>,
}

impl Channel {
    pub fn new(nodes: usize, mode: CollisionMode) -> Self {
        Channel {
            mode,
            next_id: 0,
            active: BTreeMap::new(),
            hearing: vec![Vec::new(); nodes],
            sending: vec![None; nodes],
        }
    }

    pub fn is_sending(&self, node: usize) -> bool {
        self.sending[node].is_some()
    }

    /// Carrier sense: the node transmits or hears a transmission.
    pub fn busy_at(&self, node: usize) -> bool {
        self.is_sending(node) || !self.hearing[node].is_empty()
    }

    pub fn active(&self) -> impl Iterator<Item = (u64, &Airing)> {
        self.active.iter().map(|(&id, a)| (id, a))
    }

    /// Puts a transmission on the air. Under receiver overlap, every hearer
    /// already receiving or transmitting loses both receptions, and the
    /// sender stops hearing whatever it was receiving.
    pub fn start(&mut self, sender: usize, hearers: Vec<usize>) -> u64 {
        assert!(self.sending[sender].is_none(), "node {sender} is already transmitting");
        let id = self.next_id;
        self.next_id += 1;
        let mut airing = Airing { sender, corrupted: vec![false; hearers.len()], hearers };
        if self.mode == CollisionMode::ReceiverOverlap {
            for &other in &self.hearing[sender] {
                self.active.get_mut(&other).expect("heard airing is active").spoil(sender);
            }
            for i in 0..airing.hearers.len() {
                let h = airing.hearers[i];
                if self.sending[h].is_some() || !self.hearing[h].is_empty() {
                    airing.corrupted[i] = true;
                }
                for &other in &self.hearing[h] {
                    self.active.get_mut(&other).expect("heard airing is active").spoil(h);
                }
            }
        }
        for &h in &airing.hearers {
            self.hearing[h].push(id);
        }
        self.sending[sender] = Some(id);
        self.active.insert(id, airing);
        id
    }

    pub fn finish(&mut self, id: u64) -> Airing {
        let airing = self.active.remove(&id).expect("finishing an active airing");
        for &h in &airing.hearers {
            self.hearing[h].retain(|&x| x != id);
        }
        self.sending[airing.sender] = None;
        airing
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_at_a_receiver_spoils_both() {
        // 0 -> 1 <- 2, with 0 and 2 hidden from each other.
        let mut c = Channel::new(3, CollisionMode::ReceiverOverlap);
        let a = c.start(0, vec![1]);
        assert!(c.busy_at(1) && !c.busy_at(2));
        let b = c.start(2, vec![1]);
        assert!(!c.finish(a).clean(1));
        assert!(!c.finish(b).clean(1));
    }

    #[test]
    fn ideal_mode_never_spoils() {
        let mut c = Channel::new(3, CollisionMode::Ideal);
        let a = c.start(0, vec![1]);
        let b = c.start(2, vec![1]);
        assert!(c.finish(a).clean(1));
        assert!(c.finish(b).clean(1));
    }

    #[test]
    fn sequential_transmissions_are_clean() {
        let mut c = Channel::new(3, CollisionMode::ReceiverOverlap);
        let a = c.start(0, vec![1, 2]);
        assert!(c.finish(a).clean(2));
        let b = c.start(2, vec![1]);
        let air = c.finish(b);
        assert!(air.clean(1) && !air.clean(0));
        assert!(!c.busy_at(1));
    }

    #[test]
    fn transmitting_receiver_is_deaf() {
        let mut c = Channel::new(3, CollisionMode::ReceiverOverlap);
        let a = c.start(1, vec![2]);
        let b = c.start(0, vec![1]);
        assert!(!c.finish(b).clean(1));
        assert!(c.finish(a).clean(2));
        // Starting to send while receiving spoils the reception.
        let a = c.start(0, vec![1]);
        let b = c.start(1, vec![2]);
        assert!(!c.finish(a).clean(1));
        assert!(c.finish(b).clean(2));
    }
}
