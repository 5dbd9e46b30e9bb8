use proptest::prelude::*;

use redes_core::consensus::accept_block;
use redes_core::ledger::{
    canonical_hash, forge_block, mine_proof, valid_chain, valid_proof, Action, Block, Chain, Difficulty,
    MacAddr, NodeId, Timestamp, Transaction,
};
use redes_core::son::{replay_acl, SimulatedFirewall, SonActuator};

fn d1() -> Difficulty {
    Difficulty::new(1).unwrap()
}

fn arb_tx() -> impl Strategy<Value = Transaction> {
    (any::<[u8; 6]>(), any::<bool>(), "[a-z0-9-]{1,12}", "[a-z0-9-]{1,12}").prop_map(|(mac, allow, s, r)| {
        Transaction::new(
            NodeId::new(s).unwrap(),
            NodeId::new(r).unwrap(),
            MacAddr::new(mac),
            if allow { Action::Allow } else { Action::Deny },
        )
    })
}

fn arb_chain(max_len: usize) -> impl Strategy<Value = Chain> {
    prop::collection::vec((prop::collection::vec(arb_tx(), 1..4), 0u64..1u64 << 50), 1..max_len).prop_map(
        |blocks| {
            let mut chain = Chain::genesis();
            for (txs, ts) in blocks {
                let forged = forge_block(&chain, &txs, d1(), Timestamp::from_micros(ts)).unwrap();
                accept_block(&mut chain, forged.block, d1()).unwrap();
            }
            chain
        },
    )
}

#[derive(Debug, Clone)]
enum Mutation {
    Index,
    PreviousHash,
    Proof,
    Timestamp,
    DropTx,
    AddTx(Transaction),
    FlipAction,
    Mac,
}

fn arb_mutation() -> impl Strategy<Value = Mutation> {
    prop_oneof![
        Just(Mutation::Index),
        Just(Mutation::PreviousHash),
        Just(Mutation::Proof),
        Just(Mutation::Timestamp),
        Just(Mutation::DropTx),
        arb_tx().prop_map(Mutation::AddTx),
        Just(Mutation::FlipAction),
        Just(Mutation::Mac),
    ]
}

fn mutate(block: &mut Block, m: &Mutation) {
    match m {
        Mutation::Index => block.index += 1,
        Mutation::PreviousHash => block.previous_hash.push('0'),
        Mutation::Proof => block.proof += 1,
        Mutation::Timestamp => block.timestamp = Timestamp::from_micros(block.timestamp.as_micros() ^ 1),
        Mutation::DropTx if !block.transactions.is_empty() => {
            block.transactions.pop();
        }
        Mutation::DropTx => block.transactions.push(Transaction::new(
            NodeId::new("x").unwrap(),
            NodeId::new("y").unwrap(),
            MacAddr::new([0; 6]),
            Action::Allow,
        )),
        Mutation::AddTx(tx) => block.transactions.push(tx.clone()),
        Mutation::FlipAction | Mutation::Mac if block.transactions.is_empty() => {
            block.transactions.push(Transaction::new(
                NodeId::new("x").unwrap(),
                NodeId::new("y").unwrap(),
                MacAddr::new([0; 6]),
                Action::Deny,
            ))
        }
        Mutation::FlipAction => {
            let tx = &mut block.transactions[0];
            tx.action = if tx.action == Action::Allow { Action::Deny } else { Action::Allow };
        }
        Mutation::Mac => {
            let mut o = block.transactions[0].mac.octets();
            o[5] ^= 0x01;
            block.transactions[0].mac = MacAddr::new(o);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn any_non_tip_mutation_invalidates(chain in arb_chain(9), pick in any::<prop::sample::Index>(), m in arb_mutation()) {
        prop_assume!(chain.len() >= 2);
        let mut blocks = chain.into_blocks();
        let k = pick.index(blocks.len() - 1);
        let before = blocks[k].clone();
        mutate(&mut blocks[k], &m);
        prop_assert_ne!(&before, &blocks[k]);
        prop_assert!(!valid_chain(&blocks, d1()));
    }

    #[test]
    fn wire_round_trip_keeps_hash(chain in arb_chain(5)) {
        for block in chain.blocks() {
            let parsed: Block = serde_json::from_str(&block.canonical_json()).unwrap();
            prop_assert_eq!(canonical_hash(&parsed), canonical_hash(block));
            prop_assert_eq!(&parsed, block);
        }
    }

    #[test]
    fn mined_proof_is_valid(last in 0u64..1_000_000, d in 1u8..=3) {
        let diff = Difficulty::new(d).unwrap();
        let mined = mine_proof(last, diff);
        prop_assert!(valid_proof(last, mined.proof, diff));
        prop_assert!((0..mined.proof).all(|p| !valid_proof(last, p, diff)));
    }

    #[test]
    fn forge_always_extends_validly(chain in arb_chain(5), txs in prop::collection::vec(arb_tx(), 1..4)) {
        let forged = forge_block(&chain, &txs, d1(), Timestamp::from_micros(9)).unwrap();
        let mut blocks = chain.blocks().to_vec();
        blocks.push(forged.block);
        prop_assert!(valid_chain(&blocks, d1()));
    }

    #[test]
    fn acl_is_a_pure_fold(chain in arb_chain(6)) {
        let mut son = SonActuator::new(SimulatedFirewall::new());
        for block in chain.blocks() {
            son.process_son(block);
        }
        prop_assert_eq!(son.acl(), &replay_acl(chain.blocks()));
        let calls = son.backend().calls();
        let again = son.replay_chain(chain.blocks());
        prop_assert_eq!(again.calls(), 0);
        prop_assert_eq!(son.backend().calls(), calls);
        for (mac, entry) in son.acl().iter() {
            prop_assert_eq!(son.backend().query(mac), Some(entry.action));
        }
    }

    #[test]
    fn injected_failures_do_not_change_acl(chain in arb_chain(6), failures in 0usize..6) {
        let mut son = SonActuator::new(SimulatedFirewall::new());
        son.backend_mut().fail_next(failures);
        son.replay_chain(chain.blocks());
        prop_assert_eq!(son.acl(), &replay_acl(chain.blocks()));
        // Each replay retries whatever is still out of step.
        for _ in 0..failures {
            son.replay_chain(chain.blocks());
        }
        for (mac, entry) in son.acl().iter() {
            prop_assert_eq!(son.backend().query(mac), Some(entry.action));
        }
    }
}
