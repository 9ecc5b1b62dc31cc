//! Property tests: trace format round-trips, oracle equivalence of every
//! variant on generated operation scripts, and structural validity after
//! every operation.

use proptest::prelude::*;

use pqlab::oracle::{oracle_replay, OracleHeap};
use pqlab::trace::{Opcode, Trace, TraceRecord};
use pqlab::variant::all_variants;
use pqlab::{make_key, Key64};

/// Op script shape: a sequence of weighted choices driven by proptest.
#[derive(Debug, Clone)]
enum ScriptOp {
    Insert(u32),
    DeleteMin,
    /// (target selector, key shrink divisor)
    Decrease(usize, u32),
}

fn script_strategy(max_len: usize) -> impl Strategy<Value = Vec<ScriptOp>> {
    let op = prop_oneof![
        4 => any::<u32>().prop_map(ScriptOp::Insert),
        2 => Just(ScriptOp::DeleteMin),
        3 => (any::<usize>(), 2u32..16).prop_map(|(t, d)| ScriptOp::Decrease(t, d)),
    ];
    proptest::collection::vec(op, 1..max_len)
}

/// Materializes a script into a well-formed trace via the oracle. Ops that
/// would be invalid in context (delete on empty, decrease with no room) are
/// skipped, so every generated trace is valid by construction.
fn script_to_trace(script: &[ScriptOp]) -> Trace {
    let mut oracle = OracleHeap::new();
    let mut records = Vec::new();
    let mut live: Vec<u32> = Vec::new();
    let mut next_id = 0u32;
    for op in script {
        match op {
            ScriptOp::Insert(key32) => {
                let key = make_key(*key32, next_id);
                if oracle.insert(next_id, key).is_ok() {
                    records.push(TraceRecord::insert(next_id, key));
                    live.push(next_id);
                    next_id += 1;
                }
            }
            ScriptOp::DeleteMin => {
                if let Ok((id, key)) = oracle.delete_min() {
                    records.push(TraceRecord::delete_min(id, key));
                    live.retain(|&x| x != id);
                }
            }
            ScriptOp::Decrease(t, div) => {
                if live.is_empty() {
                    continue;
                }
                let id = live[t % live.len()];
                let cur = oracle.key_of(id).unwrap();
                let new = Key64::from_raw(cur.raw / *div as u64);
                if new.raw < cur.raw && !oracle.contains_key(new) {
                    oracle.decrease_key(id, new).unwrap();
                    records.push(TraceRecord::decrease_key(id, new));
                }
            }
        }
    }
    Trace::from_records("prop", vec![], records)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_round_trip_is_bit_exact(script in script_strategy(120)) {
        let trace = script_to_trace(&script);
        let mut bytes = Vec::new();
        trace.write_binary(&mut bytes).unwrap();
        let back = Trace::read_binary(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(&back.records, &trace.records);
        prop_assert_eq!(&back.header, &trace.header);
        let mut again = Vec::new();
        back.write_binary(&mut again).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn every_variant_matches_the_oracle(script in script_strategy(150)) {
        let trace = script_to_trace(&script);
        let want = oracle_replay(&trace.records).unwrap();
        for v in all_variants() {
            if trace.header.decrease_count > 0 && !v.supports_decrease_key() {
                continue;
            }
            let mut heap = v.build(trace.header.max_live as usize);
            let mut handles = Vec::new();
            let mut got = Vec::new();
            for rec in &trace.records {
                match rec.opcode {
                    Opcode::Insert => handles.push(heap.insert(rec.id, rec.key).unwrap()),
                    Opcode::DeleteMin => got.push(heap.delete_min().unwrap()),
                    Opcode::DecreaseKey => {
                        heap.decrease_key(handles[rec.id as usize], rec.key).unwrap()
                    }
                }
            }
            prop_assert_eq!(&got, &want, "variant {}", v);
        }
    }

    #[test]
    fn structure_stays_valid_after_every_op(
        script in script_strategy(80),
        variant_pick in any::<usize>(),
    ) {
        let trace = script_to_trace(&script);
        let candidates: Vec<_> = all_variants()
            .into_iter()
            .filter(|v| v.supports_decrease_key() || trace.header.decrease_count == 0)
            .collect();
        let v = candidates[variant_pick % candidates.len()];
        let mut heap = v.build(trace.header.max_live as usize);
        let mut handles = Vec::new();
        let mut inserts = 0i64;
        let mut deletes = 0i64;
        for rec in &trace.records {
            match rec.opcode {
                Opcode::Insert => {
                    handles.push(heap.insert(rec.id, rec.key).unwrap());
                    inserts += 1;
                }
                Opcode::DeleteMin => {
                    heap.delete_min().unwrap();
                    deletes += 1;
                }
                Opcode::DecreaseKey => {
                    heap.decrease_key(handles[rec.id as usize], rec.key).unwrap()
                }
            }
            let violations = heap.validate();
            prop_assert!(violations.is_empty(), "{}: {:?}", v, violations);
            prop_assert_eq!(heap.len() as i64, inserts - deletes);
        }
    }

    #[test]
    fn find_min_tracks_the_oracle(script in script_strategy(60)) {
        let trace = script_to_trace(&script);
        let mut oracle = OracleHeap::new();
        let v: pqlab::HeapVariant = "rank_pairing_t2".parse().unwrap();
        let mut heap = v.build(trace.header.max_live as usize);
        let mut handles = Vec::new();
        for rec in &trace.records {
            match rec.opcode {
                Opcode::Insert => {
                    oracle.insert(rec.id, rec.key).unwrap();
                    handles.push(heap.insert(rec.id, rec.key).unwrap());
                }
                Opcode::DeleteMin => {
                    oracle.delete_min().unwrap();
                    heap.delete_min().unwrap();
                }
                Opcode::DecreaseKey => {
                    oracle.decrease_key(rec.id, rec.key).unwrap();
                    heap.decrease_key(handles[rec.id as usize], rec.key).unwrap();
                }
            }
            match (oracle.find_min(), heap.find_min()) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "disagree on emptiness: {:?}", other),
            }
        }
    }
}
