//! Order-0 Shannon entropy estimates standing in for a real entropy coder.
//! All monotone rate relationships the features rely on are preserved.

use std::collections::HashMap;

/// Shannon entropy in bits of one symbol stream times its length,
/// i.e. the idealized coded size.
pub fn stream_bits(symbols: &[i64]) -> f64 {
    if symbols.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<i64, u64> = HashMap::new();
    for &s in symbols {
        *counts.entry(s).or_insert(0) += 1;
    }
    let n = symbols.len() as f64;
    let entropy: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    entropy * n
}

/// Total idealized bits over independent streams, rounded up to whole bits.
pub fn total_bits<'a>(streams: impl IntoIterator<Item = &'a [i64]>) -> u64 {
    let sum: f64 = streams.into_iter().map(stream_bits).sum();
    sum.ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stream_costs_nothing() {
        assert_eq!(stream_bits(&[5; 100]), 0.0);
        assert_eq!(stream_bits(&[]), 0.0);
    }

    #[test]
    fn uniform_binary_stream_costs_one_bit_each() {
        let symbols: Vec<i64> = (0..64).map(|i| i % 2).collect();
        assert!((stream_bits(&symbols) - 64.0).abs() < 1e-9);
    }

    #[test]
    fn four_equally_likely_symbols_cost_two_bits_each() {
        let symbols: Vec<i64> = (0..64).map(|i| i % 4).collect();
        assert!((stream_bits(&symbols) - 128.0).abs() < 1e-9);
    }

    #[test]
    fn total_bits_sums_streams_and_ceils() {
        let a: Vec<i64> = (0..10).map(|i| i % 2).collect();
        let b = vec![7i64; 5];
        assert_eq!(total_bits([a.as_slice(), b.as_slice()]), 10);
    }

    #[test]
    fn skewed_stream_costs_less_than_uniform() {
        let uniform: Vec<i64> = (0..100).map(|i| i % 2).collect();
        let skewed: Vec<i64> = (0..100).map(|i| i64::from(i % 10 == 0)).collect();
        assert!(stream_bits(&skewed) < stream_bits(&uniform));
    }
}
