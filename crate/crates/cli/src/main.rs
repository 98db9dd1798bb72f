mod wallet;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crct::analysis::{
    anonymity_probability, decoy_colour_simulation, exact_probability, signature_sizes,
    AnonymityReport, ColourDistribution, ColourEvent, ColourPopulation,
};
use crct::attacks::{double_spend_attack, epsilon_colour_attack};
use crct::coloured_tx::{
    make_issuance, sign_transaction, Colour, OwnedInput, Transaction, DEFAULT_RANGE_BITS,
};
use crct::group::GroupPoint;
use crct::ledger::{Ledger, LedgerError, RejectReason};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use wallet::Wallet;

#[derive(Parser)]
#[command(name = "crct", version, about = "Coloured ring confidential transactions")]
struct Cli {
    /// Ledger snapshot, created with fresh genesis decoys if missing.
    #[arg(long, global = true, env = "CRCT_LEDGER", default_value = "crct-ledger.bin")]
    ledger: PathBuf,
    #[arg(long, global = true, env = "CRCT_WALLET", default_value = "crct-wallet.json")]
    wallet: PathBuf,
    /// Seed for every random choice, for reproducible runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Native-colour outputs placed in a newly created ledger.
    #[arg(long, global = true, default_value_t = 32)]
    genesis_outputs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add a spend key to the wallet.
    Keygen,
    /// Create a new colour and credit its supply to the wallet.
    Issue {
        #[arg(long)]
        label: String,
        #[arg(long)]
        supply: u64,
        /// Publish the supply in the clear.
        #[arg(long)]
        open_amount: bool,
        #[arg(long, default_value_t = DEFAULT_RANGE_BITS)]
        width: u32,
    },
    /// Build and sign a transfer of one colour.
    Transfer {
        #[arg(long)]
        colour: String,
        #[arg(long)]
        amount: u64,
        /// Recipient public key in hex; defaults to a new wallet key.
        #[arg(long)]
        to: Option<GroupPoint>,
        #[arg(long, default_value_t = 4)]
        ring_size: usize,
        #[arg(long, default_value_t = DEFAULT_RANGE_BITS)]
        width: u32,
        #[arg(long, default_value = "crct-tx.json")]
        out: PathBuf,
        /// Also apply the transaction to the ledger.
        #[arg(long)]
        apply: bool,
    },
    /// Check a transaction against the ledger without applying it.
    Verify {
        #[arg(long, default_value = "crct-tx.json")]
        tx: PathBuf,
    },
    /// Apply a transaction to the ledger.
    Apply {
        #[arg(long, default_value = "crct-tx.json")]
        tx: PathBuf,
    },
    /// Unspent wallet outputs.
    Balance,
    /// Decoy-colour anonymity probabilities.
    SimulateAnonymity {
        #[arg(long)]
        chi: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Dist::Uniform)]
        distribution: Dist,
        /// Zipf exponent.
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Event to simulate; defaults to matches-spender for uniform and
        /// all-equal for Zipf.
        #[arg(long, value_enum)]
        event: Option<Event>,
    },
    /// Signature and proof sizes.
    Sizes {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value_t = DEFAULT_RANGE_BITS)]
        width: u32,
    },
    /// Run an attack against a throwaway ledger and show the verdict.
    AttackDemo {
        #[arg(value_enum)]
        attack: Attack,
        #[arg(long, default_value_t = 1)]
        epsilon: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Uniform,
    Zipf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Event {
    MatchesSpender,
    AllEqual,
}

#[derive(Clone, Copy, ValueEnum)]
enum Attack {
    EpsilonColour,
    DoubleSpend,
}

enum Failure {
    Reject(RejectReason),
    Io(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Reject(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<LedgerError> for Failure {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::InsufficientOutputs { .. } => Failure::Other(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

impl From<crct::error::TxError> for Failure {
    fn from(e: crct::error::TxError) -> Self {
        Failure::Other(e.to_string())
    }
}

struct Ctx {
    json: bool,
    rng: ChaCha20Rng,
    ledger_path: PathBuf,
    wallet_path: PathBuf,
    genesis_outputs: usize,
}

impl Ctx {
    fn ledger(&mut self) -> Result<Ledger, Failure> {
        if self.ledger_path.exists() {
            return Ok(Ledger::load(&self.ledger_path)?);
        }
        let ledger = Ledger::with_decoy_genesis(self.genesis_outputs, DEFAULT_RANGE_BITS, &mut self.rng);
        ledger.save(&self.ledger_path)?;
        Ok(ledger)
    }

    fn wallet(&self) -> Result<Wallet, Failure> {
        Ok(Wallet::load_or_default(&self.wallet_path)?)
    }

    /// Prints `value` as JSON, or `text` otherwise.
    fn emit(&self, value: Value, text: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        } else {
            println!("{}", text());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rng = match cli.seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    };
    let mut ctx = Ctx {
        json: cli.json,
        rng,
        ledger_path: cli.ledger,
        wallet_path: cli.wallet,
        genesis_outputs: cli.genesis_outputs,
    };
    match run(&mut ctx, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (kind, message) = match &failure {
                Failure::Reject(r) => ("reject", r.to_string()),
                Failure::Io(m) => ("io", m.clone()),
                Failure::Other(m) => ("error", m.clone()),
            };
            if ctx.json {
                let mut body = json!({ "ok": false, "kind": kind, "message": message });
                if let Failure::Reject(r) = &failure {
                    body["reason"] = serde_json::to_value(r).expect("json");
                }
                println!("{}", serde_json::to_string_pretty(&body).expect("json"));
            } else {
                eprintln!("{kind}: {message}");
            }
            ExitCode::from(failure.code())
        }
    }
}

fn run(ctx: &mut Ctx, command: Command) -> Result<(), Failure> {
    match command {
        Command::Keygen => keygen(ctx),
        Command::Issue {
            label,
            supply,
            open_amount,
            width,
        } => issue(ctx, &label, supply, open_amount, width),
        Command::Transfer {
            colour,
            amount,
            to,
            ring_size,
            width,
            out,
            apply,
        } => transfer(ctx, &colour, amount, to, ring_size, width, &out, apply),
        Command::Verify { tx } => verify(ctx, &tx),
        Command::Apply { tx } => apply(ctx, &tx),
        Command::Balance => balance(ctx),
        Command::SimulateAnonymity {
            chi,
            m,
            distribution,
            s,
            trials,
            event,
        } => simulate(ctx, chi, m, distribution, s, trials, event),
        Command::Sizes { n, m, q, width } => sizes(ctx, n, m, q, width),
        Command::AttackDemo { attack, epsilon } => attack_demo(ctx, attack, epsilon),
    }
}

fn keygen(ctx: &mut Ctx) -> Result<(), Failure> {
    let mut wallet = ctx.wallet()?;
    let (index, public) = wallet.new_key(&mut ctx.rng);
    wallet.save(&ctx.wallet_path)?;
    ctx.emit(json!({ "ok": true, "index": index, "public_key": public }), || {
        format!("key {index}: {public}")
    });
    Ok(())
}

fn issue(ctx: &mut Ctx, label: &str, supply: u64, open: bool, width: u32) -> Result<(), Failure> {
    let mut ledger = ctx.ledger()?;
    let mut wallet = ctx.wallet()?;
    let (key, public) = wallet.new_key(&mut ctx.rng);
    let (tx, opening) = make_issuance(label, supply, public, open, width, &mut ctx.rng)?;
    let receipt = ledger.apply(&tx).map_err(Failure::Reject)?;
    wallet.remember(key, opening);
    ledger.save(&ctx.ledger_path)?;
    wallet.save(&ctx.wallet_path)?;
    let colour = Colour::from_label(label);
    ctx.emit(
        json!({
            "ok": true,
            "label": label,
            "colour_id": colour.id,
            "supply": supply,
            "output": receipt.first_output,
            "height": receipt.height,
        }),
        || format!("issued {supply} {label} as output {} at height {}", receipt.first_output, receipt.height),
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn transfer(
    ctx: &mut Ctx,
    label: &str,
    amount: u64,
    to: Option<GroupPoint>,
    ring_size: usize,
    width: u32,
    out: &Path,
    apply_now: bool,
) -> Result<(), Failure> {
    if ring_size < 2 {
        return Err(Failure::Other("ring size must be at least 2".into()));
    }
    let mut ledger = ctx.ledger()?;
    let mut wallet = ctx.wallet()?;
    let colour = Colour::from_label(label).id;
    let mut holdings: Vec<_> = wallet
        .holdings(&ledger)
        .into_iter()
        .filter(|h| h.opening.colour == colour)
        .collect();
    holdings.sort_by_key(|h| std::cmp::Reverse(h.opening.amount));
    let mut chosen = Vec::new();
    let mut total: u128 = 0;
    for h in holdings {
        if total >= amount as u128 {
            break;
        }
        total += h.opening.amount as u128;
        chosen.push(h);
    }
    if total < amount as u128 || chosen.is_empty() {
        return Err(Failure::Other(format!(
            "insufficient {label}: have {total}, need {amount}"
        )));
    }
    let change = u64::try_from(total - amount as u128)
        .map_err(|_| Failure::Other("change does not fit in 64 bits".into()))?;

    let (recipient, own_recipient) = match to {
        Some(p) => (p, wallet.key_for(&p)),
        None => {
            let (k, p) = wallet.new_key(&mut ctx.rng);
            (p, Some(k))
        }
    };
    let mut payments = vec![(recipient, amount)];
    let mut owners = vec![own_recipient];
    if change > 0 {
        let (k, p) = wallet.new_key(&mut ctx.rng);
        payments.push((p, change));
        owners.push(Some(k));
    }

    let m = chosen.len();
    let exclude: Vec<_> = chosen.iter().map(|h| h.reference).collect();
    let decoys: Vec<Vec<_>> = ledger
        .sample_decoys(m, ring_size - 1, &exclude, &mut ctx.rng)?
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|r| (r, ledger.ring_member(r).expect("sampled from ledger")))
                .collect()
        })
        .collect();
    let inputs: Vec<OwnedInput> = chosen
        .iter()
        .map(|h| OwnedInput {
            reference: h.reference,
            member: h.member,
            spend_key: h.spend_key,
            opening: h.opening,
        })
        .collect();
    let signed = sign_transaction(&inputs, &decoys, &payments, width, &mut ctx.rng)?;
    for (owner, opening) in owners.iter().zip(&signed.output_openings) {
        if let Some(k) = owner {
            wallet.remember(*k, *opening);
        }
    }
    std::fs::write(out, signed.tx.to_json())?;
    let mut applied = None;
    if apply_now {
        applied = Some(ledger.apply(&signed.tx).map_err(Failure::Reject)?);
        ledger.save(&ctx.ledger_path)?;
    }
    wallet.save(&ctx.wallet_path)?;
    let payment_opening = signed.output_openings[0];
    ctx.emit(
        json!({
            "ok": true,
            "tx_file": out,
            "tx_id": hex_id(&signed.tx),
            "ring_size": ring_size,
            "inputs": m,
            "outputs": signed.output_openings.len(),
            "change": change,
            "payment_opening": payment_opening,
            "applied": applied,
        }),
        || {
            let mut s = format!(
                "signed transfer of {amount} {label} ({m} input(s), ring size {ring_size}, change {change})\nwrote {}",
                out.display()
            );
            if let Some(r) = applied {
                s.push_str(&format!("\napplied at height {}", r.height));
            }
            s
        },
    );
    Ok(())
}

fn read_tx(path: &Path) -> Result<Transaction, Failure> {
    let bytes = std::fs::read(path)?;
    let parsed = if bytes.first() == Some(&b'{') {
        let text = std::str::from_utf8(&bytes).map_err(|e| Failure::Io(e.to_string()))?;
        Transaction::from_json(text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    } else {
        Transaction::from_bytes(&bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    };
    parsed
}

fn hex_id(tx: &Transaction) -> String {
    tx.id().iter().map(|b| format!("{b:02x}")).collect()
}

fn verify(ctx: &mut Ctx, path: &Path) -> Result<(), Failure> {
    let ledger = ctx.ledger()?;
    let tx = read_tx(path)?;
    ledger.check(&tx).map_err(Failure::Reject)?;
    ctx.emit(json!({ "ok": true, "verdict": "accept", "tx_id": hex_id(&tx) }), || {
        "accept".into()
    });
    Ok(())
}

fn apply(ctx: &mut Ctx, path: &Path) -> Result<(), Failure> {
    let mut ledger = ctx.ledger()?;
    let tx = read_tx(path)?;
    let receipt = ledger.apply(&tx).map_err(Failure::Reject)?;
    ledger.save(&ctx.ledger_path)?;
    ctx.emit(json!({ "ok": true, "receipt": receipt, "tx_id": hex_id(&tx) }), || {
        format!(
            "applied at height {}: outputs {}..{}",
            receipt.height,
            receipt.first_output,
            receipt.first_output + receipt.output_count as u64
        )
    });
    Ok(())
}

fn balance(ctx: &mut Ctx) -> Result<(), Failure> {
    let ledger = ctx.ledger()?;
    let wallet = ctx.wallet()?;
    let rows: Vec<Value> = wallet
        .holdings(&ledger)
        .iter()
        .map(|h| {
            let label = ledger
                .colours()
                .label_for(&h.opening.colour)
                .map(str::to_owned)
                .unwrap_or_else(|| h.opening.colour.to_string());
            json!({ "output": h.reference.output_id, "colour": label, "amount": h.opening.amount })
        })
        .collect();
    ctx.emit(json!({ "ok": true, "holdings": rows }), || {
        if rows.is_empty() {
            return "no unspent outputs".into();
        }
        rows.iter()
            .map(|r| format!("output {:>6}  {:>20} {}", r["output"], r["amount"], r["colour"].as_str().unwrap_or("")))
            .collect::<Vec<_>>()
            .join("\n")
    });
    Ok(())
}

fn simulate(
    ctx: &mut Ctx,
    chi: usize,
    m: usize,
    dist: Dist,
    s: f64,
    trials: u64,
    event: Option<Event>,
) -> Result<(), Failure> {
    if chi == 0 || m == 0 || trials == 0 {
        return Err(Failure::Other("chi, m and trials must be positive".into()));
    }
    let distribution = match dist {
        Dist::Uniform => ColourDistribution::Uniform,
        Dist::Zipf => ColourDistribution::Zipf { s },
    };
    let event = match (event, dist) {
        (Some(Event::MatchesSpender), _) | (None, Dist::Uniform) => ColourEvent::MatchesSpender,
        (Some(Event::AllEqual), _) | (None, Dist::Zipf) => ColourEvent::AllEqual,
    };
    let population = ColourPopulation::from_distribution(chi, distribution)
        .ok_or_else(|| Failure::Other("distribution has no positive weight".into()))?;
    let estimate = decoy_colour_simulation(&population, m, trials, event, distribution, &mut ctx.rng);
    let exact = exact_probability(&distribution.probabilities(chi), m, event);
    let closed_form: Option<AnonymityReport> = matches!(dist, Dist::Uniform)
        .then(|| anonymity_probability(chi, m, distribution, 0, &mut ctx.rng));
    ctx.emit(
        json!({ "ok": true, "estimate": estimate, "exact": exact, "closed_form": closed_form }),
        || {
            let mut s = format!(
                "event: {}\nestimate {:.6} ± {:.6} ({} / {} trials)\nexact    {:.6}",
                estimate.event_definition,
                estimate.p_same_colour_vector,
                estimate.std_error,
                estimate.hits,
                estimate.trials,
                exact
            );
            if let Some(c) = &closed_form {
                s.push_str(&format!("\n1/chi^m  {:.6e}", c.p_same_colour_vector));
            }
            s
        },
    );
    Ok(())
}

fn sizes(ctx: &mut Ctx, n: usize, m: usize, q: usize, width: u32) -> Result<(), Failure> {
    if n < 2 || m < 1 || q < 1 || width == 0 || width > 64 {
        return Err(Failure::Other("need n >= 2, m >= 1, q >= 1 and 1 <= width <= 64".into()));
    }
    let r = signature_sizes(n, m, q, width);
    ctx.emit(json!({ "ok": true, "sizes": r }), || {
        format!(
            "base MLSAG          {:>8} bytes\n\
             coloured MLSAG      {:>8} bytes (+{})\n\
             range proofs        {:>8} bytes\n\
             Borromean reference {:>8} bytes\n\
             colour equality     {:>8} bytes\n\
             total               {:>8} bytes (+ input references)",
            r.base_mlsag_bytes,
            r.coloured_mlsag_bytes,
            r.colour_overhead(),
            r.range_proof_bytes,
            r.borromean_reference_bytes,
            r.colour_eq_bytes,
            r.total_bytes
        )
    });
    Ok(())
}

fn attack_demo(ctx: &mut Ctx, attack: Attack, epsilon: u64) -> Result<(), Failure> {
    let (verdict, report, summary) = match attack {
        Attack::EpsilonColour => {
            let r = epsilon_colour_attack(epsilon, &mut ctx.rng)?;
            let summary = format!(
                "inputs coloured f-{epsilon} and f+{epsilon}, output coloured f\n\
                 aggregate colour check balances: {}\n\
                 checked signer: {}",
                r.aggregate_colour_balances,
                r.honest_signer_refused.as_deref().unwrap_or("signed")
            );
            (r.rejection.clone(), serde_json::to_value(&r).expect("json"), summary)
        }
        Attack::DoubleSpend => {
            let r = double_spend_attack(&mut ctx.rng)?;
            let summary = format!(
                "first spend accepted: {}\nkey images linked: {}",
                r.first_accepted, r.images_linked
            );
            (r.rejection.clone(), serde_json::to_value(&r).expect("json"), summary)
        }
    };
    let tx_json = serde_json::to_string_pretty(&report["transaction"]).expect("json");
    ctx.emit(json!({ "ok": verdict.is_some(), "report": report }), || {
        format!(
            "{summary}\nmalicious transaction:\n{tx_json}\nledger verdict: {}",
            verdict.as_ref().map_or("ACCEPTED".to_string(), |r| format!("rejected ({r})"))
        )
    });
    match verdict {
        Some(_) => Ok(()),
        None => Err(Failure::Other("attack transaction was accepted".into())),
    }
}

