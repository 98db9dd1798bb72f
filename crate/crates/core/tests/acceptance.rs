//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::{Duration, Instant};

use crct::analysis::{
    decoy_colour_simulation, signature_sizes, ColourDistribution, ColourEvent, ColourPopulation,
};
use crct::attacks::epsilon_colour_attack;
use crct::coloured_tx::{
    colour_id, make_issuance, make_output, sign_transaction, AssetOpening, OwnedInput,
    RingMember, Transaction, TransferPlan, TxInputRef,
};
use crct::group::{g, random_scalar, GroupPoint, Scalar};
use crct::ledger::{Ledger, RejectReason};
use crct::mlsag::{self, keygen, keyselect, link, random_decoys, MlsagSignature};
use crct::pedersen::{combine, commit, verify_opening, Opening};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn mlsag_correctness() -> Outcome {
    let start = Instant::now();
    let configs: Vec<(usize, usize)> = (2..=8).flat_map(|n| (1..=4).map(move |m| (n, m))).collect();
    let verified: usize = configs
        .par_iter()
        .map(|&(n, m)| {
            let mut rng = rng(1000 + (n * 10 + m) as u64);
            (0..200)
                .filter(|_| {
                    let own = keygen(m, &mut rng).unwrap();
                    let decoys = random_decoys(n - 1, m, &mut rng);
                    let ring = keyselect(&own, &decoys, &mut rng).unwrap();
                    let msg: [u8; 32] = rng.gen();
                    let sig = mlsag::sign(&msg, &ring, own.secrets.as_ref().unwrap(), &mut rng).unwrap();
                    mlsag::verify(&msg, &sig, &ring.matrix) == Ok(true)
                })
                .count()
        })
        .sum();
    let total = configs.len() * 200;
    let elapsed = start.elapsed();
    outcome(
        verified == total && elapsed < Duration::from_secs(60),
        format!("{verified}/{total} verified over n=2..8, m=1..4 in {:.1}s (limit 60s)", secs(elapsed)),
    )
}

/// An owned output on a ledger plus what is needed to spend it.
struct Owned {
    reference: TxInputRef,
    member: RingMember,
    key: Scalar,
    opening: AssetOpening,
}

fn spend_owned(ledger: &Ledger, owned: &Owned, width: u32, rng: &mut ChaCha20Rng) -> Transaction {
    let decoys: Vec<Vec<_>> = ledger
        .sample_decoys(1, 3, &[owned.reference], rng)
        .unwrap()
        .into_iter()
        .map(|row| row.into_iter().map(|r| (r, ledger.ring_member(r).unwrap())).collect())
        .collect();
    let input = OwnedInput {
        reference: owned.reference,
        member: owned.member,
        spend_key: owned.key,
        opening: owned.opening,
    };
    let recipient = random_scalar(rng) * g();
    sign_transaction(&[input], &decoys, &[(recipient, owned.opening.amount)], width, rng)
        .unwrap()
        .tx
}

fn linkability() -> Outcome {
    const W: u32 = 8;
    let mut rng = rng(2);
    let colour = colour_id("gold");
    let mut genesis = Ledger::with_decoy_genesis(40, W, &mut rng).outputs().to_vec();
    let mut owned = Vec::new();
    for i in 0..100 {
        let key = random_scalar(&mut rng);
        let (out, opening) = make_output(key * g(), 1 + i, colour, W, &mut rng).unwrap();
        owned.push(Owned {
            reference: TxInputRef::new(genesis.len() as u64),
            member: RingMember::from(&out),
            key,
            opening,
        });
        genesis.push(out);
    }
    let mut ledger = Ledger::genesis(genesis);
    let mut caught = 0;
    for o in &owned {
        let first = spend_owned(&ledger, o, W, &mut rng);
        if ledger.apply(&first).is_err() {
            continue;
        }
        let second = spend_owned(&ledger, o, W, &mut rng);
        let (Transaction::Transfer(a), Transaction::Transfer(b)) = (&first, &second) else {
            continue;
        };
        let different_ring = a.ring_refs != b.ring_refs || a.message() != b.message();
        if different_ring
            && link(&a.mlsag, &b.mlsag)
            && ledger.apply(&second) == Err(RejectReason::DoubleSpend)
        {
            caught += 1;
        }
    }

    let mut false_links = 0;
    for _ in 0..1000 {
        let sig = |rng: &mut ChaCha20Rng| -> MlsagSignature {
            let own = keygen(1, rng).unwrap();
            let ring = keyselect(&own, &random_decoys(1, 1, rng), rng).unwrap();
            mlsag::sign(b"pair", &ring, own.secrets.as_ref().unwrap(), rng).unwrap()
        };
        let (a, b) = (sig(&mut rng), sig(&mut rng));
        false_links += link(&a, &b) as usize;
    }
    outcome(
        caught == 100 && false_links == 0,
        format!("{caught}/100 double spends linked and rejected; {false_links}/1000 false links"),
    )
}

fn flip(bytes: &mut [u8], rng: &mut ChaCha20Rng) {
    let bit = rng.gen_range(0..bytes.len() * 8);
    bytes[bit / 8] ^= 1 << (bit % 8);
}

fn forgery_resistance() -> Outcome {
    let mut rng = rng(3);
    let (n, m) = (3, 2);
    let own = keygen(m, &mut rng).unwrap();
    let ring = keyselect(&own, &random_decoys(n - 1, m, &mut rng), &mut rng).unwrap();
    let msg: [u8; 32] = rng.gen();
    let sig = mlsag::sign(&msg, &ring, own.secrets.as_ref().unwrap(), &mut rng).unwrap();
    assert_eq!(mlsag::verify(&msg, &sig, &ring.matrix), Ok(true));
    let sig_bytes = sig.to_bytes();
    let ring_bytes: Vec<u8> = ring.matrix.iter().flatten().flat_map(|p| p.to_bytes()).collect();

    let accepts = |msg: &[u8], sig_bytes: &[u8], ring_bytes: &[u8]| -> bool {
        let Ok(sig) = MlsagSignature::from_bytes(sig_bytes, n, m, m) else {
            return false;
        };
        let points: Result<Vec<GroupPoint>, _> = ring_bytes.chunks(32).map(GroupPoint::from_slice).collect();
        let Ok(points) = points else { return false };
        let matrix: Vec<Vec<GroupPoint>> = points.chunks(m).map(<[_]>::to_vec).collect();
        mlsag::verify(msg, &sig, &matrix) == Ok(true)
    };
    let mut accepted = 0;
    let mut per_field = [0usize; 3];
    for _ in 0..10_000 {
        let (mut msg, mut s, mut r) = (msg, sig_bytes.clone(), ring_bytes.clone());
        let field = rng.gen_range(0..3);
        per_field[field] += 1;
        match field {
            0 => flip(&mut msg, &mut rng),
            1 => flip(&mut s, &mut rng),
            _ => flip(&mut r, &mut rng),
        }
        accepted += accepts(&msg, &s, &r) as usize;
    }

    // The same at transaction level: flip bits of a whole serialized
    // coloured transfer with n = 3, m = 2.
    const W: u32 = 8;
    let colour = colour_id("gold");
    let mut genesis = Ledger::with_decoy_genesis(8, W, &mut rng).outputs().to_vec();
    let mut inputs = Vec::new();
    for amount in [3, 4] {
        let key = random_scalar(&mut rng);
        let (out, opening) = make_output(key * g(), amount, colour, W, &mut rng).unwrap();
        inputs.push(OwnedInput {
            reference: TxInputRef::new(genesis.len() as u64),
            member: RingMember::from(&out),
            spend_key: key,
            opening,
        });
        genesis.push(out);
    }
    let ledger = Ledger::genesis(genesis);
    let exclude: Vec<_> = inputs.iter().map(|i| i.reference).collect();
    let decoys: Vec<Vec<_>> = ledger
        .sample_decoys(2, 2, &exclude, &mut rng)
        .unwrap()
        .into_iter()
        .map(|row| row.into_iter().map(|r| (r, ledger.ring_member(r).unwrap())).collect())
        .collect();
    let payments = [(random_scalar(&mut rng) * g(), 5), (random_scalar(&mut rng) * g(), 2)];
    let tx = sign_transaction(&inputs, &decoys, &payments, W, &mut rng).unwrap().tx;
    assert_eq!(ledger.check(&tx), Ok(()));
    let tx_bytes = tx.to_bytes();
    let mut tx_accepted = 0;
    for _ in 0..10_000 {
        let mut b = tx_bytes.clone();
        flip(&mut b, &mut rng);
        if let Ok(t) = Transaction::from_bytes(&b) {
            tx_accepted += ledger.check(&t).is_ok() as usize;
        }
    }
    outcome(
        accepted == 0 && tx_accepted == 0,
        format!(
            "{accepted}/10000 MLSAG mutations accepted (msg {}, sig {}, ring {}); {tx_accepted}/10000 transaction mutations accepted",
            per_field[0], per_field[1], per_field[2]
        ),
    )
}

/// Plain-text accounting: a transfer is valid iff amounts balance and every
/// colour agrees.
fn oracle(inputs: &[(u64, u8)], output: (u64, u8)) -> bool {
    inputs.iter().map(|i| i.0).sum::<u64>() == output.0 && inputs.iter().all(|i| i.1 == output.1)
}

/// Input (amount, colour) pairs and the single output.
type Case = (Vec<(u64, u8)>, (u64, u8));

fn conservation_oracle() -> Outcome {
    const W: u32 = 3;
    let mut rng = rng(4);
    let colours = [colour_id("gold"), colour_id("silver")];
    let mut genesis = Ledger::with_decoy_genesis(6, W, &mut rng).outputs().to_vec();
    // Two outputs for each (colour, amount) so a row can hold equal pairs.
    let mut store: Vec<Vec<Vec<Owned>>> = Vec::new();
    for c in colours {
        let mut by_amount = Vec::new();
        for a in 0..8u64 {
            let mut pair = Vec::new();
            for _ in 0..2 {
                let key = random_scalar(&mut rng);
                let (out, opening) = make_output(key * g(), a, c, W, &mut rng).unwrap();
                pair.push(Owned {
                    reference: TxInputRef::new(genesis.len() as u64),
                    member: RingMember::from(&out),
                    key,
                    opening,
                });
                genesis.push(out);
            }
            by_amount.push(pair);
        }
        store.push(by_amount);
    }
    let ledger = Ledger::genesis(genesis);

    let mut cases: Vec<Case> = Vec::new();
    for a in 0..8 {
        for o in 0..8 {
            for oc in 0..2 {
                cases.push((vec![(a, 0)], (o, oc)));
            }
        }
    }
    for a in 0..8 {
        for b in 0..8 {
            for o in 0..8 {
                for (bc, oc) in [(0, 0), (1, 0), (0, 1)] {
                    cases.push((vec![(a, 0), (b, bc)], (o, oc)));
                }
            }
        }
    }

    let mut agree = 0;
    let mut accepted = 0;
    let mut expected_accepts = 0;
    for (ins, out) in &cases {
        let m = ins.len();
        let owned: Vec<&Owned> = ins
            .iter()
            .enumerate()
            .map(|(j, (a, c))| &store[*c as usize][*a as usize][j])
            .collect();
        let exclude: Vec<_> = owned.iter().map(|o| o.reference).collect();
        let decoy_refs = ledger.sample_decoys(m, 1, &exclude, &mut rng).unwrap();
        let secret_index = rng.gen_range(0..2);
        let mut ring_refs = decoy_refs;
        ring_refs.insert(secret_index, exclude.clone());
        let ring = ring_refs
            .iter()
            .map(|row| row.iter().map(|r| ledger.ring_member(*r).unwrap()).collect())
            .collect();
        let (output, output_opening) =
            make_output(random_scalar(&mut rng) * g(), out.0, colours[out.1 as usize], W, &mut rng).unwrap();
        let plan = TransferPlan {
            ring_refs,
            ring,
            secret_index,
            spend_keys: owned.iter().map(|o| o.key).collect(),
            inputs: owned.iter().map(|o| o.opening).collect(),
            outputs: vec![output],
            output_openings: vec![output_opening],
            metadata: Vec::new(),
        };
        let tx = Transaction::Transfer(plan.sign_unchecked(&mut rng).unwrap());
        let verdict = ledger.check(&tx).is_ok();
        let expected = oracle(ins, *out);
        agree += (verdict == expected) as usize;
        accepted += verdict as usize;
        expected_accepts += expected as usize;
    }
    outcome(
        agree == cases.len(),
        format!(
            "{agree}/{} cases agree with plain-text oracle ({accepted} accepted, {expected_accepts} expected)",
            cases.len()
        ),
    )
}

fn epsilon_attack() -> Outcome {
    let mut rng = rng(5);
    let mut accepted = 0;
    let mut notes = Vec::new();
    for eps in [1u64, 2, 1 << 32] {
        let report = epsilon_colour_attack(eps, &mut rng).unwrap();
        accepted += report.accepted() as usize;
        notes.push(format!(
            "ε={eps}: {}",
            report.rejection.map_or("ACCEPTED".into(), |r| r.to_string())
        ));
    }
    outcome(accepted == 0, format!("{accepted}/3 accepted ({})", notes.join(", ")))
}

fn size_formulas() -> Outcome {
    const W: u32 = 4;
    let mut rng = rng(6);
    let mut ok = 0;
    let mut shown = Vec::new();
    for _ in 0..20 {
        let n = rng.gen_range(2..=12);
        let m = rng.gen_range(1..=4);
        let q = rng.gen_range(1..=3);
        let colour = colour_id("gold");
        let mut genesis = Ledger::with_decoy_genesis(n * m, W, &mut rng).outputs().to_vec();
        let mut inputs = Vec::new();
        for _ in 0..m {
            let key = random_scalar(&mut rng);
            let (out, opening) = make_output(key * g(), 2, colour, W, &mut rng).unwrap();
            inputs.push(OwnedInput {
                reference: TxInputRef::new(genesis.len() as u64),
                member: RingMember::from(&out),
                spend_key: key,
                opening,
            });
            genesis.push(out);
        }
        let ledger = Ledger::genesis(genesis);
        let exclude: Vec<_> = inputs.iter().map(|i| i.reference).collect();
        let decoys: Vec<Vec<_>> = ledger
            .sample_decoys(m, n - 1, &exclude, &mut rng)
            .unwrap()
            .into_iter()
            .map(|row| row.into_iter().map(|r| (r, ledger.ring_member(r).unwrap())).collect())
            .collect();
        let total = 2 * m as u64;
        let payments: Vec<(GroupPoint, u64)> = (0..q)
            .map(|k| {
                let amount = if k == 0 { total - (q as u64 - 1) } else { 1 };
                (random_scalar(&mut rng) * g(), amount)
            })
            .collect();
        let tx = sign_transaction(&inputs, &decoys, &payments, W, &mut rng).unwrap().tx;
        let Transaction::Transfer(t) = &tx else { unreachable!() };
        let measured = t.mlsag.to_bytes().len();
        let report = signature_sizes(n, m, q, W);
        let good = ledger.check(&tx).is_ok()
            && measured == (n * (2 * m + 1) + 1 + m) * 32
            && report.coloured_mlsag_bytes == measured
            && report.base_mlsag_bytes == (n * (m + 1) + 1 + m) * 32
            && report.coloured_mlsag_bytes - report.base_mlsag_bytes == n * m * 32
            && report.colour_eq_bytes == t.colour_eq_proofs.len() * 64;
        ok += good as usize;
        if shown.len() < 3 {
            shown.push(format!("(n={n},m={m}) {measured}B"));
        }
    }
    let r = signature_sizes(11, 2, 1, 64);
    let examples = r.base_mlsag_bytes == 1152 && r.coloured_mlsag_bytes == 1856 && r.borromean_reference_bytes == 6176;
    outcome(
        ok == 20 && examples,
        format!(
            "{ok}/20 random shapes match; e.g. {}; n=11,m=2 gives {}/{} bytes",
            shown.join(", "),
            r.base_mlsag_bytes,
            r.coloured_mlsag_bytes
        ),
    )
}

fn anonymity_estimates() -> Outcome {
    const TRIALS: u64 = 1_000_000;
    let start = Instant::now();
    let mut within = 0;
    let mut notes = Vec::new();
    for (i, (chi, m)) in [(5usize, 1usize), (5, 2), (200, 2)].into_iter().enumerate() {
        let mut rng = rng(70 + i as u64);
        let pop = ColourPopulation::from_distribution(chi, ColourDistribution::Uniform).unwrap();
        let r = decoy_colour_simulation(&pop, m, TRIALS, ColourEvent::MatchesSpender, ColourDistribution::Uniform, &mut rng);
        let p = (chi as f64).powi(-(m as i32));
        let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
        let dev = (r.p_same_colour_vector - p).abs() / sigma;
        within += (dev <= 3.0) as usize;
        notes.push(format!("χ={chi},m={m}: {:.3e} vs {p:.3e} ({dev:.2}σ)", r.p_same_colour_vector));
    }
    let zipf = ColourDistribution::Zipf { s: 1.0 };
    let pop = ColourPopulation::from_distribution(200, zipf).unwrap();
    let r = decoy_colour_simulation(&pop, 2, TRIALS, ColourEvent::AllEqual, zipf, &mut rng(79));
    let zipf_ok = (0.03..=0.08).contains(&r.p_same_colour_vector);
    notes.push(format!("zipf(s=1),χ=200,m=2: {:.4}", r.p_same_colour_vector));
    let elapsed = start.elapsed();
    outcome(
        within == 3 && zipf_ok && elapsed < Duration::from_secs(30),
        format!("{}; {:.1}s (limit 30s)", notes.join("; "), secs(elapsed)),
    )
}

fn issuance_uniqueness() -> Outcome {
    const W: u32 = 8;
    let mut rng = rng(8);
    let mut ledger = Ledger::genesis(Vec::new());
    let key = |rng: &mut ChaCha20Rng| random_scalar(rng) * g();
    let (first, _) = make_issuance("gold", 10, key(&mut rng), false, W, &mut rng).unwrap();
    let first_ok = ledger.apply(&first).is_ok();
    let (again, _) = make_issuance("gold", 99, key(&mut rng), true, W, &mut rng).unwrap();
    let same_label = ledger.apply(&again);
    // A different label claiming the existing colour scalar.
    let (Transaction::Issuance(mut forged), _) =
        make_issuance("gold", 5, key(&mut rng), false, W, &mut rng).unwrap()
    else {
        unreachable!()
    };
    forged.label = "not-gold".into();
    let same_scalar = ledger.apply(&Transaction::Issuance(forged));
    let native = ledger.apply(&make_issuance("native", 1, key(&mut rng), false, W, &mut rng).unwrap().0);

    let mut issued = 0;
    for i in 0..1000 {
        let (tx, _) = make_issuance(&format!("colour-{i}"), i % 256, key(&mut rng), i % 2 == 0, W, &mut rng).unwrap();
        issued += ledger.apply(&tx).is_ok() as usize;
    }
    let registry = ledger.colours();
    let pass = first_ok
        && same_label == Err(RejectReason::DuplicateColour)
        && same_scalar.is_err()
        && native == Err(RejectReason::DuplicateColour)
        && issued == 1000
        && registry.len() == 1002
        && registry.is_injective();
    outcome(
        pass,
        format!(
            "repeat label: {}; reused scalar: {}; {issued}/1000 new colours accepted; registry {} entries, injective {}",
            same_label.map_or_else(|e| e.to_string(), |_| "ACCEPTED".into()),
            same_scalar.map_or_else(|e| e.to_string(), |_| "ACCEPTED".into()),
            registry.len(),
            registry.is_injective()
        ),
    )
}

fn pedersen_properties() -> Outcome {
    let mut rng = rng(9);
    let mut ok = 0;
    for _ in 0..10_000 {
        let (a, b, c, d) = (
            random_scalar(&mut rng),
            random_scalar(&mut rng),
            random_scalar(&mut rng),
            random_scalar(&mut rng),
        );
        let (x, y) = (commit(a, b), commit(c, d));
        let good = x + y == commit(a + c, b + d)
            && x - y == commit(a - c, b - d)
            && combine(&[x, y], &[y]) == x
            && verify_opening(&(x + y), &Opening::new(a + c, b + d))
            && !verify_opening(&x, &Opening::new(a + Scalar::ONE, b))
            && !verify_opening(&x, &Opening::new(a, b + Scalar::ONE))
            && commit(a, b).0 == a * crct::group::h() + b * g();
        ok += good as usize;
    }
    outcome(ok == 10_000, format!("{ok}/10000 cases satisfy homomorphism and opening identities"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("mlsag correctness", mlsag_correctness),
        ("linkability", linkability),
        ("forgery resistance", forgery_resistance),
        ("conservation oracle (W=3)", conservation_oracle),
        ("±ε colour attack", epsilon_attack),
        ("size formulas", size_formulas),
        ("anonymity estimates", anonymity_estimates),
        ("issuance uniqueness", issuance_uniqueness),
        ("pedersen properties", pedersen_properties),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failures += !o.pass as usize;
        println!(
            "{} [{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            secs(start.elapsed())
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
