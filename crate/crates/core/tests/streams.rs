//! Stream buffering checked against a reference model on random traces.

use std::collections::VecDeque;
use std::sync::Arc;

use daas_core::aerodata::{Cursor, StreamData, SubscriptionHandle};
use daas_core::SimTime;
use parking_lot::Mutex;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Publish { value: u32, dt: u64 },
    Poll,
    Subscribe,
    Unsubscribe,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        6 => (any::<u32>(), 0u64..5).prop_map(|(value, dt)| Op::Publish { value, dt }),
        2 => Just(Op::Poll),
        1 => Just(Op::Subscribe),
        1 => Just(Op::Unsubscribe),
    ]
}

type Inbox = Arc<Mutex<Vec<(u64, u32)>>>;
/// Handle, delivered items, items the model expects.
type Sub = (SubscriptionHandle, Inbox, Vec<(u64, u32)>);

/// Reference: a plain bounded queue of (seq, value, consumed).
#[derive(Default)]
struct Model {
    buffer: VecDeque<(u64, u32, bool)>,
    next_seq: u64,
    drops: u64,
    subscribers: usize,
    cursor: Option<u64>,
}

impl Model {
    fn publish(&mut self, value: u32, capacity: usize) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        if self.buffer.len() == capacity {
            let (_, _, consumed) = self.buffer.pop_front().unwrap();
            if !consumed {
                self.drops += 1;
            }
        }
        self.buffer.push_back((seq, value, self.subscribers > 0));
        seq
    }

    fn poll(&mut self) -> Vec<(u64, u32)> {
        let cursor = self.cursor;
        let mut out = Vec::new();
        for slot in self.buffer.iter_mut() {
            if cursor.is_none_or(|c| slot.0 > c) {
                slot.2 = true;
                out.push((slot.0, slot.1));
            }
        }
        if let Some(&(s, _)) = out.last() {
            self.cursor = Some(s);
        }
        out
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_bounded_queue_model(
        capacity in 1usize..8,
        ops in prop::collection::vec(op(), 1..120),
    ) {
        let stream = StreamData::<u32>::with_capacity("s", capacity);
        let mut model = Model::default();
        let mut cursor = Cursor::start();
        let mut t = 0u64;
        let mut subs: Vec<Sub> = Vec::new();

        for op in ops {
            match op {
                Op::Publish { value, dt } => {
                    t += dt;
                    let seq = stream.publish(value, SimTime::from_millis(t)).unwrap();
                    prop_assert_eq!(seq, model.publish(value, capacity));
                    for (_, _, expected) in subs.iter_mut() {
                        expected.push((seq, value));
                    }
                }
                Op::Poll => {
                    let (items, next) = stream.poll(cursor);
                    cursor = next;
                    let got: Vec<(u64, u32)> =
                        items.into_iter().map(|(s, d)| (s, *d.get_data())).collect();
                    prop_assert_eq!(got, model.poll());
                }
                Op::Subscribe => {
                    let seen = Arc::new(Mutex::new(Vec::new()));
                    let sink = seen.clone();
                    let h = stream.subscribe(move |seq, item| sink.lock().push((seq, *item.get_data())));
                    subs.push((h, seen, Vec::new()));
                    model.subscribers += 1;
                }
                Op::Unsubscribe => {
                    if let Some((h, seen, expected)) = subs.pop() {
                        h.unsubscribe();
                        prop_assert_eq!(&*seen.lock(), &expected);
                        model.subscribers -= 1;
                    }
                }
            }
            prop_assert_eq!(stream.drop_count(), model.drops);
            prop_assert_eq!(stream.buffered(), model.buffer.len());
        }
        for (_, seen, expected) in &subs {
            // push delivery is complete and in publication order
            prop_assert_eq!(&*seen.lock(), expected);
        }
    }
}

#[test]
fn regressing_timestamp_is_rejected() {
    let s = StreamData::<u8>::new("s");
    s.publish(1, SimTime::from_millis(10)).unwrap();
    assert!(s.publish(2, SimTime::from_millis(9)).is_err());
    assert_eq!(s.published(), 1);
}
