//! Gödel numbering of symbol sequences and expressions.
//!
//! Sequences of naturals are coded by writing each entry in binary
//! (most significant bit first), joining the entries with commas,
//! reversing the whole character sequence, and replacing `0` by `10`,
//! `1` by `11` and `,` by `01`. The resulting bit string, read as a
//! binary natural, is the code. Expressions are coded as the sequence
//! of their symbol codes.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::fmt;
use thiserror::Error;

/// A natural number carrying the bit-pair sequence encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GodelNumber(pub BigUint);

impl GodelNumber {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Binary rendering with a `0b` prefix, MSB first.
    pub fn to_binary_string(&self) -> String {
        format!("0b{}", self.0.to_str_radix(2))
    }

    /// Parses decimal or `0b`-prefixed binary text.
    pub fn parse(text: &str) -> Result<Self, GodelError> {
        let text = text.trim();
        let parsed = if let Some(bits) = text.strip_prefix("0b") {
            BigUint::parse_bytes(bits.as_bytes(), 2)
        } else {
            BigUint::parse_bytes(text.as_bytes(), 10)
        };
        parsed.map(GodelNumber).ok_or(GodelError::BadNumeral)
    }
}

impl fmt::Display for GodelNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<BigUint> for GodelNumber {
    fn from(value: BigUint) -> Self {
        GodelNumber(value)
    }
}

impl From<u64> for GodelNumber {
    fn from(value: u64) -> Self {
        GodelNumber(BigUint::from(value))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GodelError {
    #[error("cannot encode an empty sequence")]
    EmptySequence,
    #[error("malformed sequence code: {0}")]
    Malformed(&'static str),
    #[error("unknown symbol code {0}")]
    UnknownSymbolCode(u64),
    #[error("not a decimal or 0b-prefixed binary numeral")]
    BadNumeral,
}

/// Binary representation of `w`, MSB first; `[0]` is the single character `0`.
pub fn binary_repr(w: &BigUint) -> String {
    w.to_str_radix(2)
}

/// Encodes a non-empty sequence of naturals.
pub fn encode_seq(xs: &[BigUint]) -> Result<GodelNumber, GodelError> {
    if xs.is_empty() {
        return Err(GodelError::EmptySequence);
    }
    let mut chars: Vec<u8> = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            chars.push(b',');
        }
        chars.extend_from_slice(binary_repr(x).as_bytes());
    }
    chars.reverse();
    let mut bits = String::with_capacity(chars.len() * 2);
    for ch in chars {
        bits.push_str(match ch {
            b'0' => "10",
            b'1' => "11",
            b',' => "01",
            _ => unreachable!("binary repr emits only 0, 1, comma"),
        });
    }
    // The reversed sequence starts with the last digit of the final entry,
    // so the leading pair is 10 or 11 and the value has no leading zeros.
    Ok(GodelNumber(
        BigUint::parse_bytes(bits.as_bytes(), 2).expect("non-empty bit string"),
    ))
}

/// Convenience wrapper over `encode_seq` for small entries.
pub fn encode_seq_u64(xs: &[u64]) -> Result<GodelNumber, GodelError> {
    let xs: Vec<BigUint> = xs.iter().map(|&x| BigUint::from(x)).collect();
    encode_seq(&xs)
}

/// Exact inverse of `encode_seq` on its range; malformed codes are reported,
/// never panicked on.
pub fn decode_seq(g: &GodelNumber) -> Result<Vec<BigUint>, GodelError> {
    if g.0.is_zero() {
        return Err(GodelError::Malformed("zero is not a sequence code"));
    }
    let bits = g.0.to_str_radix(2);
    if bits.len() % 2 != 0 {
        return Err(GodelError::Malformed("odd bit length"));
    }
    let bytes = bits.as_bytes();
    let mut chars: Vec<u8> = Vec::with_capacity(bits.len() / 2);
    for pair in bytes.chunks_exact(2) {
        chars.push(match pair {
            b"10" => b'0',
            b"11" => b'1',
            b"01" => b',',
            _ => return Err(GodelError::Malformed("pair 00 outside the code alphabet")),
        });
    }
    chars.reverse();
    let mut out = Vec::new();
    for component in chars.split(|&c| c == b',') {
        if component.is_empty() {
            return Err(GodelError::Malformed("empty number component"));
        }
        if component.len() > 1 && component[0] == b'0' {
            return Err(GodelError::Malformed("leading zero in component"));
        }
        out.push(BigUint::parse_bytes(component, 2).expect("binary digits"));
    }
    Ok(out)
}

/// Concatenation `||` of two sequence codes.
pub fn concat(g1: &GodelNumber, g2: &GodelNumber) -> Result<GodelNumber, GodelError> {
    let mut xs = decode_seq(g1)?;
    xs.extend(decode_seq(g2)?);
    encode_seq(&xs)
}

/// Basic symbols of the PA language that carry Gödel codes.
///
/// Derived function symbols (length, Bit, monus, exponent) have no codes;
/// expressions must be rewritten to the core symbols before numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    ForAll,
    LParen,
    Zero,
    RParen,
    Succ,
    Not,
    Less,
    Implies,
    Plus,
    Equal,
    Times,
    Comma,
    /// Parameter symbol `a_i`, 1-indexed.
    Param(u32),
    /// Variable symbol `x_i`, 1-indexed.
    Var(u32),
}

impl Symbol {
    /// The symbol's code: fixed table for the basic symbols, then
    /// `a_i` at `20 + 4(i-1)` and `x_i` at `22 + 4(i-1)`.
    pub fn code(self) -> u64 {
        match self {
            Symbol::ForAll => 0,
            Symbol::LParen => 1,
            Symbol::Zero => 2,
            Symbol::RParen => 3,
            Symbol::Succ => 4,
            Symbol::Not => 5,
            Symbol::Less => 6,
            Symbol::Implies => 7,
            Symbol::Plus => 8,
            Symbol::Equal => 9,
            Symbol::Times => 10,
            Symbol::Comma => 11,
            Symbol::Param(i) => 20 + 4 * (u64::from(i) - 1),
            Symbol::Var(i) => 22 + 4 * (u64::from(i) - 1),
        }
    }

    pub fn from_code(code: u64) -> Result<Symbol, GodelError> {
        Ok(match code {
            0 => Symbol::ForAll,
            1 => Symbol::LParen,
            2 => Symbol::Zero,
            3 => Symbol::RParen,
            4 => Symbol::Succ,
            5 => Symbol::Not,
            6 => Symbol::Less,
            7 => Symbol::Implies,
            8 => Symbol::Plus,
            9 => Symbol::Equal,
            10 => Symbol::Times,
            11 => Symbol::Comma,
            c if c >= 20 && (c - 20) % 4 == 0 => Symbol::Param(u32::try_from((c - 20) / 4 + 1).unwrap()),
            c if c >= 22 && (c - 22) % 4 == 0 => Symbol::Var(u32::try_from((c - 22) / 4 + 1).unwrap()),
            c => return Err(GodelError::UnknownSymbolCode(c)),
        })
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::ForAll => write!(f, "A"),
            Symbol::LParen => write!(f, "("),
            Symbol::Zero => write!(f, "0"),
            Symbol::RParen => write!(f, ")"),
            Symbol::Succ => write!(f, "S"),
            Symbol::Not => write!(f, "!"),
            Symbol::Less => write!(f, "<"),
            Symbol::Implies => write!(f, "->"),
            Symbol::Plus => write!(f, "+"),
            Symbol::Equal => write!(f, "="),
            Symbol::Times => write!(f, "*"),
            Symbol::Comma => write!(f, ","),
            Symbol::Param(i) => write!(f, "a{i}"),
            Symbol::Var(i) => write!(f, "x{i}"),
        }
    }
}

/// `#phi` of a symbol sequence: the sequence code of the symbol codes.
pub fn encode_expression(symbols: &[Symbol]) -> Result<GodelNumber, GodelError> {
    if symbols.is_empty() {
        return Err(GodelError::EmptySequence);
    }
    let codes: Vec<BigUint> = symbols.iter().map(|s| BigUint::from(s.code())).collect();
    encode_seq(&codes)
}

/// Inverse of `encode_expression`.
pub fn decode_expression(g: &GodelNumber) -> Result<Vec<Symbol>, GodelError> {
    let codes = decode_seq(g)?;
    codes
        .iter()
        .map(|c| {
            let c = u64::try_from(c).map_err(|_| {
                GodelError::Malformed("symbol code exceeds the symbol table range")
            })?;
            Symbol::from_code(c)
        })
        .collect()
}

/// Gödel number of a UTF-8 description string: the sequence code of its bytes.
///
/// Used for family descriptors, where any fixed description of the family
/// may serve as its number.
pub fn encode_description(text: &str) -> GodelNumber {
    let bytes: Vec<BigUint> = text.bytes().map(|b| BigUint::from(u64::from(b) + 1)).collect();
    if bytes.is_empty() {
        // An empty description is coded as the one-entry sequence <0>.
        return encode_seq(&[BigUint::zero()]).expect("non-empty");
    }
    encode_seq(&bytes).expect("non-empty")
}

/// Inverse of `encode_description`; fails on codes outside its range.
pub fn decode_description(g: &GodelNumber) -> Result<String, GodelError> {
    let entries = decode_seq(g)?;
    if entries.len() == 1 && entries[0].is_zero() {
        return Ok(String::new());
    }
    let mut bytes = Vec::with_capacity(entries.len());
    for e in &entries {
        let v = u64::try_from(e).map_err(|_| GodelError::Malformed("description byte out of range"))?;
        if !(1..=256).contains(&v) {
            return Err(GodelError::Malformed("description byte out of range"));
        }
        bytes.push((v - 1) as u8);
    }
    String::from_utf8(bytes).map_err(|_| GodelError::Malformed("description is not UTF-8"))
}

/// `|n|`: bit length of `[n]`, with `|0| = 1` since `[0]` is "0".
pub fn bit_len(n: &BigUint) -> u64 {
    if n.is_zero() {
        1
    } else {
        n.bits()
    }
}

/// Smallest natural whose sequence code is valid: `<0>` = 0b10.
pub fn min_code() -> GodelNumber {
    GodelNumber(BigUint::one() << 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    /// Independent oracle: encode by literal string manipulation, one rule
    /// at a time, exactly as the definition states them.
    fn encode_oracle(xs: &[u64]) -> BigUint {
        let joined: String = xs
            .iter()
            .map(|x| format!("{:b}", x))
            .collect::<Vec<_>>()
            .join(",");
        let reversed: String = joined.chars().rev().collect();
        let substituted: String = reversed
            .chars()
            .map(|c| match c {
                '0' => "10",
                '1' => "11",
                ',' => "01",
                _ => unreachable!(),
            })
            .collect();
        BigUint::parse_bytes(substituted.as_bytes(), 2).unwrap()
    }

    #[test]
    fn worked_example_3_4_5() {
        let g = encode_seq_u64(&[3, 4, 5]).unwrap();
        assert_eq!(g.0.to_str_radix(2), "11101101101011011111");
        assert_eq!(g.to_binary_string(), "0b11101101101011011111");
    }

    #[test]
    fn encode_singleton_zero() {
        // Oracle: [0] -> "0" -> reversed "0" -> "10" -> 2.
        let g = encode_seq_u64(&[0]).unwrap();
        assert_eq!(g.0, big(2));
        assert_eq!(g.0, encode_oracle(&[0]));
    }

    #[test]
    fn encode_matches_string_oracle() {
        let cases: Vec<Vec<u64>> = vec![
            vec![1],
            vec![7],
            vec![0, 0],
            vec![13],
            vec![3, 4, 5],
            vec![2, 9, 2],
            vec![1024, 0, 77, 1],
        ];
        for xs in cases {
            let got = encode_seq_u64(&xs).unwrap();
            assert_eq!(got.0, encode_oracle(&xs), "sequence {xs:?}");
        }
    }

    #[test]
    fn decode_of_three_yields_singleton_one() {
        // "11" decodes to the reversed digit "1": one bare component, value 1.
        let got = decode_seq(&GodelNumber::from(3u64)).unwrap();
        assert_eq!(got, vec![big(1)]);
    }

    #[test]
    fn decode_rejects_zero_and_odd_lengths() {
        assert!(decode_seq(&GodelNumber::from(0u64)).is_err());
        // 0b1 and 0b101 have odd bit length.
        assert!(decode_seq(&GodelNumber::from(1u64)).is_err());
        assert!(decode_seq(&GodelNumber::from(5u64)).is_err());
    }

    #[test]
    fn decode_rejects_pair_00() {
        // 0b1100 contains the pair 00.
        assert!(matches!(
            decode_seq(&GodelNumber::from(0b1100u64)),
            Err(GodelError::Malformed(_))
        ));
    }

    #[test]
    fn decode_rejects_empty_component() {
        // chars ",0" reversed is "0," -> pairs for '0','.' .. construct directly:
        // encode the char string "0," i.e. reversed ",0": bits 10 then 01 -> 0b1001.
        assert!(decode_seq(&GodelNumber::from(0b1001u64)).is_err());
    }

    #[test]
    fn decode_rejects_leading_zero_component() {
        // Component "01" (a non-canonical binary numeral). Char string after
        // reversal must read "01", i.e. pre-reversal "10": bits for '1','0'
        // after reversal: chars "0","1" -> reversed source "10".
        // Build the bit string directly: chars in code order are '0','1',
        // so pairs are 10 11 -> 0b1011; reversed char order is "10" -> that is
        // a canonical component. Use three digits: code chars '0','0','1'
        // -> pairs 10 10 11 -> reversed chars "100" (canonical), so instead
        // code chars '1','0' give reversed "01": pairs 11 10 -> 0b1110.
        assert!(decode_seq(&GodelNumber::from(0b1110u64)).is_err());
    }

    #[test]
    fn round_trip_small() {
        for xs in [vec![7u64], vec![0, 1, 2, 3], vec![65535, 1, 0]] {
            let g = encode_seq_u64(&xs).unwrap();
            let back = decode_seq(&g).unwrap();
            let expect: Vec<BigUint> = xs.iter().map(|&x| big(x)).collect();
            assert_eq!(back, expect);
        }
    }

    #[test]
    fn concat_is_sequence_append() {
        let g1 = encode_seq_u64(&[1]).unwrap();
        let g2 = encode_seq_u64(&[2, 3]).unwrap();
        let joined = concat(&g1, &g2).unwrap();
        assert_eq!(joined, encode_seq_u64(&[1, 2, 3]).unwrap());
    }

    #[test]
    fn concat_is_associative() {
        let a = encode_seq_u64(&[9, 1]).unwrap();
        let b = encode_seq_u64(&[0]).unwrap();
        let c = encode_seq_u64(&[4, 4, 2]).unwrap();
        let left = concat(&concat(&a, &b).unwrap(), &c).unwrap();
        let right = concat(&a, &concat(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn symbol_codes_match_the_table() {
        assert_eq!(Symbol::ForAll.code(), 0);
        assert_eq!(Symbol::LParen.code(), 1);
        assert_eq!(Symbol::Zero.code(), 2);
        assert_eq!(Symbol::RParen.code(), 3);
        assert_eq!(Symbol::Succ.code(), 4);
        assert_eq!(Symbol::Not.code(), 5);
        assert_eq!(Symbol::Less.code(), 6);
        assert_eq!(Symbol::Implies.code(), 7);
        assert_eq!(Symbol::Plus.code(), 8);
        assert_eq!(Symbol::Equal.code(), 9);
        assert_eq!(Symbol::Times.code(), 10);
        assert_eq!(Symbol::Comma.code(), 11);
        assert_eq!(Symbol::Param(1).code(), 20);
        assert_eq!(Symbol::Var(1).code(), 22);
        assert_eq!(Symbol::Param(2).code(), 24);
        assert_eq!(Symbol::Var(2).code(), 26);
        assert_eq!(Symbol::Param(3).code(), 28);
        assert_eq!(Symbol::Var(3).code(), 30);
    }

    #[test]
    fn symbol_code_round_trip() {
        for code in [0u64, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 20, 22, 24, 26, 100, 102] {
            let sym = Symbol::from_code(code).unwrap();
            assert_eq!(sym.code(), code);
        }
        for bad in [12u64, 13, 15, 19, 21, 23] {
            assert!(Symbol::from_code(bad).is_err());
        }
    }

    #[test]
    fn encode_single_zero_symbol() {
        let g = encode_expression(&[Symbol::Zero]).unwrap();
        assert_eq!(g, encode_seq_u64(&[2]).unwrap());
    }

    #[test]
    fn description_round_trip() {
        for text in ["", "family:sat", "family:eq-self", "godel-proof:123:pa"] {
            let g = encode_description(text);
            assert_eq!(decode_description(&g).unwrap(), text);
        }
    }

    #[test]
    fn bit_len_of_zero_is_one() {
        assert_eq!(bit_len(&big(0)), 1);
        assert_eq!(bit_len(&big(13)), 4);
    }
}
