//! Buy: a bank client works until the balance covers a purchase. Traces are
//! simulated directly since the balance is numeric.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{draw_index, hypothesis_priors, Family, GeneratorConfig, Setting};

const SET1_ACTIONS: [&str; 6] = [
    "open-checking-account",
    "open-savings-account",
    "payroll",
    "transfer-funds",
    "buy-house",
    "pay-college",
];
const GENERIC: [&str; 5] = [
    "open-checking-account",
    "open-savings-account",
    "payroll",
    "transfer-funds",
    "withdraw-cash",
];
/// Goods of the ten-goal setting in increasing price order.
const GOODS: [&str; 10] = [
    "phone",
    "laptop",
    "bike",
    "furniture",
    "vacation",
    "wedding",
    "car",
    "state-college",
    "private-college",
    "house",
];

/// Payroll count range shared by both set1 goals.
const SET1_PRICE: (u32, u32) = (10, 34);
const SET1_TRANSFER_P: f64 = 0.1;
const SET2_MAX_LENGTH: f64 = 541.0;
const SET2_TRANSFER_P: f64 = 0.05;
const SET2_WITHDRAW_P: f64 = 0.03;
const SET2_DISTRACT_P: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct BuyTraces {
    pub vocab: Vec<String>,
    /// Action ids into `vocab`, with the goal label.
    pub traces: Vec<(Vec<u32>, usize)>,
    pub priors: Vec<f64>,
}

pub fn buy_vocab(setting: Setting) -> Vec<String> {
    match setting {
        Setting::Set1 => SET1_ACTIONS.iter().map(|s| s.to_string()).collect(),
        Setting::Set2 => GENERIC
            .iter()
            .map(|s| s.to_string())
            .chain(GOODS.iter().map(|g| format!("get-quote-{g}")))
            .chain(GOODS.iter().map(|g| format!("buy-{g}")))
            .collect(),
    }
}

fn set1_trace(rng: &mut ChaCha8Rng, priors: &[f64]) -> (Vec<u32>, usize) {
    // ids follow SET1_ACTIONS
    let label = draw_index(rng, priors);
    let mut t = Vec::new();
    if label == 0 {
        t.push(1);
    }
    t.push(0);
    let price = rng.gen_range(SET1_PRICE.0..=SET1_PRICE.1);
    for _ in 0..price {
        t.push(2);
        if rng.gen_bool(SET1_TRANSFER_P) {
            t.push(3);
        }
    }
    t.push(if label == 0 { 4 } else { 5 });
    (t, label)
}

/// Price band of good `k` in payroll units: overlapping neighbours, top band
/// sized so the longest traces come near the full-scale maximum length.
fn set2_price(rng: &mut ChaCha8Rng, k: usize, scale: f64) -> u32 {
    let unit = 0.88 * SET2_MAX_LENGTH * scale / (GOODS.len() as f64 + 0.5);
    let lo = (k as f64 + 0.5) * unit;
    let hi = (k as f64 + 1.5) * unit;
    (rng.gen_range(lo..hi).round() as u32).max(1)
}

fn set2_trace(rng: &mut ChaCha8Rng, priors: &[f64], scale: f64) -> (Vec<u32>, usize) {
    let (payroll, transfer, withdraw) = (2u32, 3u32, 4u32);
    let quote = |k: usize| (GENERIC.len() + k) as u32;
    let buy = |k: usize| (GENERIC.len() + GOODS.len() + k) as u32;

    let label = draw_index(rng, priors);
    let mut t = vec![0];
    if rng.gen_bool(0.5) {
        t.push(1);
    }
    let price = set2_price(rng, label, scale);
    // random starting balance
    let mut balance = rng.gen_range(0..=price / 4);
    let quote_at = rng.gen_range(balance..=price);
    while balance < price {
        if balance == quote_at {
            t.push(quote(label));
        }
        t.push(payroll);
        balance += 1;
        if rng.gen_bool(SET2_TRANSFER_P) {
            t.push(transfer);
        }
        if rng.gen_bool(SET2_WITHDRAW_P) {
            t.push(withdraw);
            balance = balance.saturating_sub(1);
        }
        if rng.gen_bool(SET2_DISTRACT_P) {
            t.push(quote(rng.gen_range(0..GOODS.len())));
        }
    }
    if quote_at == price {
        t.push(quote(label));
    }
    t.push(buy(label));
    (t, label)
}

/// Simulates `n` labeled traces. Trace `i` uses its own random stream, so
/// traces do not depend on `n`.
pub fn gen_buy(cfg: &GeneratorConfig, n: usize) -> BuyTraces {
    let priors = hypothesis_priors(Family::Buy, cfg.setting);
    let traces = (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            match cfg.setting {
                Setting::Set1 => set1_trace(&mut rng, &priors),
                Setting::Set2 => set2_trace(&mut rng, &priors, cfg.scale),
            }
        })
        .collect();
    BuyTraces {
        vocab: buy_vocab(cfg.setting),
        traces,
        priors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set1_marker_iff_house() {
        let b = gen_buy(&GeneratorConfig::new(Family::Buy, Setting::Set1, 4, 1.0), 2000);
        assert_eq!(b.vocab.len(), 6);
        let savings = b.vocab.iter().position(|a| a == "open-savings-account").unwrap() as u32;
        let house = b.vocab.iter().position(|a| a == "buy-house").unwrap() as u32;
        for (t, y) in &b.traces {
            assert_eq!(t[0] == savings, *y == 0);
            assert_eq!(t.contains(&savings), *y == 0);
            assert_eq!(*t.last().unwrap() == house, *y == 0);
        }
        let max = b.traces.iter().map(|(t, _)| t.len()).max().unwrap();
        assert!((35..=50).contains(&max), "{max}");
        let houses = b.traces.iter().filter(|(_, y)| *y == 0).count() as f64 / 2000.0;
        assert!((0.75..=0.85).contains(&houses), "{houses}");
    }

    #[test]
    fn set2_shape() {
        let b = gen_buy(&GeneratorConfig::new(Family::Buy, Setting::Set2, 1, 1.0), 1000);
        assert_eq!(b.vocab.len(), 25);
        assert_eq!(b.priors.len(), 10);
        let max = b.traces.iter().map(|(t, _)| t.len()).max().unwrap();
        assert!((480..=600).contains(&max), "{max}");
        for (t, y) in &b.traces {
            assert_eq!(*t.last().unwrap() as usize, 15 + y);
            assert!(t.contains(&(5 + *y as u32)));
        }
        let small = gen_buy(&GeneratorConfig::new(Family::Buy, Setting::Set2, 1, 0.1), 1000);
        let max = small.traces.iter().map(|(t, _)| t.len()).max().unwrap();
        assert!((40..=70).contains(&max), "{max}");
    }

    #[test]
    fn traces_are_prefix_stable_and_seeded() {
        let cfg = GeneratorConfig::new(Family::Buy, Setting::Set2, 9, 0.2);
        let a = gen_buy(&cfg, 50);
        let b = gen_buy(&cfg, 80);
        assert_eq!(a.traces[..], b.traces[..50]);
        assert_ne!(a.traces, gen_buy(&cfg.with_seed(10), 50).traces);
    }
}
