//! Bounded, ordered event stream with push (subscribe) and pull (poll) access.

use std::collections::VecDeque;
use std::fmt;
use std::sync::{Arc, Weak};

use parking_lot::Mutex;

use super::AeroData;
use crate::error::{DaasError, Result};
use crate::time::SimTime;

pub const DEFAULT_CAPACITY: usize = 64;
pub const CAMERA_CAPACITY: usize = 8;

type Callback<E> = Arc<Mutex<dyn FnMut(u64, &AeroData<E>) + Send>>;

/// Position of a pull consumer. Polling returns items with a sequence number
/// strictly greater than the cursor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Cursor(Option<u64>);

impl Cursor {
    /// Before the first item; the next poll returns everything still buffered.
    pub const fn start() -> Self {
        Cursor(None)
    }

    /// Just after `seq`.
    pub const fn at(seq: u64) -> Self {
        Cursor(Some(seq))
    }

    pub fn seq(self) -> Option<u64> {
        self.0
    }

    fn admits(self, seq: u64) -> bool {
        self.0.is_none_or(|c| seq > c)
    }
}

struct Slot<E> {
    seq: u64,
    data: AeroData<E>,
    consumed: bool,
}

struct State<E> {
    buffer: VecDeque<Slot<E>>,
    capacity: usize,
    next_seq: u64,
    drop_count: u64,
    last_timestamp: Option<SimTime>,
}

struct Shared<E> {
    name: String,
    state: Mutex<State<E>>,
    subscribers: Mutex<Vec<(u64, Callback<E>)>>,
    next_sub: Mutex<u64>,
}

/// A continuous stream of timestamped items.
///
/// The buffer holds at most `capacity` items; when full, the oldest is
/// evicted. An evicted item that no consumer ever saw (no push subscriber at
/// publish time and never returned by a poll) counts toward `drop_count`.
pub struct StreamData<E> {
    shared: Arc<Shared<E>>,
}

impl<E> Clone for StreamData<E> {
    fn clone(&self) -> Self {
        Self {
            shared: self.shared.clone(),
        }
    }
}

impl<E> fmt::Debug for StreamData<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = self.shared.state.lock();
        f.debug_struct("StreamData")
            .field("name", &self.shared.name)
            .field("capacity", &st.capacity)
            .field("next_seq", &st.next_seq)
            .field("drop_count", &st.drop_count)
            .finish()
    }
}

impl<E: Clone + Send + 'static> StreamData<E> {
    pub fn new(name: impl Into<String>) -> Self {
        Self::with_capacity(name, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(name: impl Into<String>, capacity: usize) -> Self {
        assert!(capacity >= 1, "stream capacity must be at least 1");
        Self {
            shared: Arc::new(Shared {
                name: name.into(),
                state: Mutex::new(State {
                    buffer: VecDeque::with_capacity(capacity),
                    capacity,
                    next_seq: 0,
                    drop_count: 0,
                    last_timestamp: None,
                }),
                subscribers: Mutex::new(Vec::new()),
                next_sub: Mutex::new(0),
            }),
        }
    }

    /// Channel name; also the producer's node id in the application graph.
    pub fn name(&self) -> &str {
        &self.shared.name
    }

    pub fn capacity(&self) -> usize {
        self.shared.state.lock().capacity
    }

    pub fn drop_count(&self) -> u64 {
        self.shared.state.lock().drop_count
    }

    /// Number of items published so far.
    pub fn published(&self) -> u64 {
        self.shared.state.lock().next_seq
    }

    pub fn buffered(&self) -> usize {
        self.shared.state.lock().buffer.len()
    }

    pub fn same_stream(&self, other: &StreamData<E>) -> bool {
        Arc::ptr_eq(&self.shared, &other.shared)
    }

    pub fn publish(&self, item: E, t: SimTime) -> Result<u64> {
        self.publish_data(AeroData::new(item, t))
    }

    /// Appends an item and synchronously delivers it to every subscriber in
    /// registration order.
    pub fn publish_data(&self, data: AeroData<E>) -> Result<u64> {
        let subscribers: Vec<Callback<E>> = self
            .shared
            .subscribers
            .lock()
            .iter()
            .map(|(_, cb)| cb.clone())
            .collect();
        let seq = {
            let mut st = self.shared.state.lock();
            if let Some(last) = st.last_timestamp {
                if data.timestamp() < last {
                    return Err(DaasError::TimestampRegression {
                        last,
                        got: data.timestamp(),
                    });
                }
            }
            let seq = st.next_seq;
            st.next_seq += 1;
            st.last_timestamp = Some(data.timestamp());
            if st.buffer.len() == st.capacity {
                if let Some(evicted) = st.buffer.pop_front() {
                    if !evicted.consumed {
                        st.drop_count += 1;
                    }
                }
            }
            st.buffer.push_back(Slot {
                seq,
                data: data.clone(),
                consumed: !subscribers.is_empty(),
            });
            seq
        };
        for cb in subscribers {
            (cb.lock())(seq, &data);
        }
        Ok(seq)
    }

    /// Registers a push consumer for every item published from now on.
    pub fn subscribe(
        &self,
        callback: impl FnMut(u64, &AeroData<E>) + Send + 'static,
    ) -> SubscriptionHandle {
        let id = {
            let mut next = self.shared.next_sub.lock();
            *next += 1;
            *next
        };
        let cb: Callback<E> = Arc::new(Mutex::new(callback));
        self.shared.subscribers.lock().push((id, cb));
        let weak: Weak<Shared<E>> = Arc::downgrade(&self.shared);
        SubscriptionHandle {
            id,
            detach: Box::new(move |id| {
                if let Some(shared) = weak.upgrade() {
                    shared.subscribers.lock().retain(|(sid, _)| *sid != id);
                }
            }),
        }
    }

    pub fn subscriber_count(&self) -> usize {
        self.shared.subscribers.lock().len()
    }

    /// Returns buffered items newer than `cursor` and the advanced cursor.
    /// Evicted items are skipped silently; the gap shows in the sequence
    /// numbers.
    pub fn poll(&self, cursor: Cursor) -> (Vec<(u64, AeroData<E>)>, Cursor) {
        let mut st = self.shared.state.lock();
        let mut out = Vec::new();
        for slot in st.buffer.iter_mut().filter(|s| cursor.admits(s.seq)) {
            slot.consumed = true;
            out.push((slot.seq, slot.data.clone()));
        }
        let next = out.last().map_or(cursor, |(seq, _)| Cursor::at(*seq));
        (out, next)
    }
}

/// Returned by [`StreamData::subscribe`].
pub struct SubscriptionHandle {
    id: u64,
    detach: Box<dyn Fn(u64) + Send + Sync>,
}

impl SubscriptionHandle {
    pub fn unsubscribe(self) {
        (self.detach)(self.id);
    }
}

impl fmt::Debug for SubscriptionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubscriptionHandle").field("id", &self.id).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(ms: u64) -> SimTime {
        SimTime::from_millis(ms)
    }

    fn values(items: &[(u64, AeroData<u32>)]) -> Vec<u32> {
        items.iter().map(|(_, d)| *d.get_data()).collect()
    }

    #[test]
    fn sequence_numbers_count_from_zero() {
        let s = StreamData::new("s");
        assert_eq!(s.publish(10u32, t(0)).unwrap(), 0);
        assert_eq!(s.publish(11, t(1)).unwrap(), 1);
        assert_eq!(s.publish(12, t(1)).unwrap(), 2);
    }

    #[test]
    fn overflow_drops_oldest() {
        let s = StreamData::with_capacity("s", 2);
        for i in 0..3u32 {
            s.publish(i, t(i as u64)).unwrap();
        }
        let (items, cursor) = s.poll(Cursor::at(0));
        assert_eq!(values(&items), vec![1, 2]);
        assert_eq!(cursor, Cursor::at(2));
        assert_eq!(s.drop_count(), 1);
    }

    #[test]
    fn timestamp_regression_is_rejected() {
        let s = StreamData::new("s");
        s.publish(1u32, t(5)).unwrap();
        let err = s.publish(2, t(4)).unwrap_err();
        assert!(matches!(err, DaasError::TimestampRegression { .. }));
        assert_eq!(s.published(), 1);
    }

    #[test]
    fn subscribers_see_items_in_order() {
        let s = StreamData::new("s");
        let a = Arc::new(Mutex::new(Vec::new()));
        let b = Arc::new(Mutex::new(Vec::new()));
        let (a2, b2) = (a.clone(), b.clone());
        s.subscribe(move |_, d: &AeroData<char>| a2.lock().push(*d.get_data()));
        s.subscribe(move |_, d: &AeroData<char>| b2.lock().push(*d.get_data()));
        s.publish('a', t(0)).unwrap();
        s.publish('b', t(1)).unwrap();
        assert_eq!(*a.lock(), vec!['a', 'b']);
        assert_eq!(*a.lock(), *b.lock());
    }

    #[test]
    fn unsubscribe_stops_delivery() {
        let s = StreamData::new("s");
        let seen = Arc::new(Mutex::new(0));
        let s2 = seen.clone();
        let h = s.subscribe(move |_, _: &AeroData<u8>| *s2.lock() += 1);
        s.publish(1, t(0)).unwrap();
        h.unsubscribe();
        s.publish(2, t(1)).unwrap();
        assert_eq!(*seen.lock(), 1);
        assert_eq!(s.subscriber_count(), 0);
    }

    #[test]
    fn poll_from_cursor() {
        let s = StreamData::new("s");
        for i in 0..5u32 {
            s.publish(i, t(i as u64)).unwrap();
        }
        let (items, _) = s.poll(Cursor::at(0));
        assert_eq!(values(&items), vec![1, 2, 3, 4]);
        let (all, _) = s.poll(Cursor::start());
        assert_eq!(values(&all), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn poll_on_empty_stream_keeps_cursor() {
        let s: StreamData<u32> = StreamData::new("s");
        let (items, c) = s.poll(Cursor::at(3));
        assert!(items.is_empty());
        assert_eq!(c, Cursor::at(3));
    }

    #[test]
    fn poll_exposes_gap_after_eviction() {
        let s = StreamData::with_capacity("s", 2);
        for i in 0..5u32 {
            s.publish(i, t(i as u64)).unwrap();
        }
        let (items, _) = s.poll(Cursor::at(0));
        let seqs: Vec<u64> = items.iter().map(|(q, _)| *q).collect();
        assert_eq!(seqs, vec![3, 4]);
        assert!(seqs[0] > 1, "gap detectable");
    }

    #[test]
    fn push_delivery_counts_as_consumption() {
        let s = StreamData::with_capacity("s", 1);
        let _h = s.subscribe(|_, _: &AeroData<u8>| {});
        for i in 0..10 {
            s.publish(i, t(i as u64)).unwrap();
        }
        assert_eq!(s.drop_count(), 0);
    }
}
