//! Named test machines shared by the test suites and the CLI.
//!
//! The decider corpus follows two tape disciplines so that circuit and
//! interpreter verdicts can agree: a machine blanks cell 0 on its first
//! step (the only interior blank, so the return leg can find the left end
//! without extra tape symbols), and it enters its halting state while
//! moving right from cell 0, which parks the halting head on cell 1 where
//! the tableau reads its output lights.

use crate::tm::{Dir, SymId, TMDescription, SYM_BLANK, SYM_ONE, SYM_ZERO};

const B: SymId = SYM_BLANK;
const O: SymId = SYM_ZERO;
const I: SymId = SYM_ONE;

/// Accepts every input in one step, parking on cell 1.
pub fn accept_all() -> TMDescription {
    TMDescription::new(
        3,
        &[],
        0,
        1,
        2,
        &[
            (0, O, 1, O, Dir::R),
            (0, I, 1, I, Dir::R),
            (0, B, 1, B, Dir::R),
        ],
    )
    .unwrap()
}

/// Rejects every input in one step.
pub fn reject_all() -> TMDescription {
    TMDescription::new(
        3,
        &[],
        0,
        1,
        2,
        &[
            (0, O, 2, O, Dir::R),
            (0, I, 2, I, Dir::R),
            (0, B, 2, B, Dir::R),
        ],
    )
    .unwrap()
}

/// Flips every bit after the first, then returns and accepts.
/// States: q0, scan, back, acc, rej.
pub fn bit_flip() -> TMDescription {
    TMDescription::new(
        5,
        &[],
        0,
        3,
        4,
        &[
            (0, O, 1, B, Dir::R),
            (0, I, 1, B, Dir::R),
            (0, B, 4, B, Dir::R),
            (1, O, 1, I, Dir::R),
            (1, I, 1, O, Dir::R),
            (1, B, 2, B, Dir::L),
            (2, O, 2, O, Dir::L),
            (2, I, 2, I, Dir::L),
            (2, B, 3, B, Dir::R),
        ],
    )
    .unwrap()
}

/// Accepts iff the input has an even number of 1 bits.
/// States: q0, scan_even, scan_odd, back_even, back_odd, acc, rej.
pub fn parity() -> TMDescription {
    TMDescription::new(
        7,
        &[],
        0,
        5,
        6,
        &[
            (0, O, 1, B, Dir::R),
            (0, I, 2, B, Dir::R),
            (0, B, 6, B, Dir::R),
            (1, O, 1, O, Dir::R),
            (1, I, 2, I, Dir::R),
            (1, B, 3, B, Dir::L),
            (2, O, 2, O, Dir::R),
            (2, I, 1, I, Dir::R),
            (2, B, 4, B, Dir::L),
            (3, O, 3, O, Dir::L),
            (3, I, 3, I, Dir::L),
            (3, B, 5, B, Dir::R),
            (4, O, 4, O, Dir::L),
            (4, I, 4, I, Dir::L),
            (4, B, 6, B, Dir::R),
        ],
    )
    .unwrap()
}

/// Copies the input one cell to the right; the two carry states do the
/// copying. Accepts every non-empty input.
/// States: q0, carry0, carry1, back, acc, rej.
pub fn copier2() -> TMDescription {
    TMDescription::new(
        6,
        &[],
        0,
        4,
        5,
        &[
            (0, O, 1, B, Dir::R),
            (0, I, 2, B, Dir::R),
            (0, B, 5, B, Dir::R),
            (1, O, 1, O, Dir::R),
            (1, I, 2, O, Dir::R),
            (1, B, 3, O, Dir::L),
            (2, O, 1, I, Dir::R),
            (2, I, 2, I, Dir::R),
            (2, B, 3, I, Dir::L),
            (3, O, 3, O, Dir::L),
            (3, I, 3, I, Dir::L),
            (3, B, 4, B, Dir::R),
        ],
    )
    .unwrap()
}

/// Tiny SAT-decider stub: reads the input as a mask of satisfied literals
/// of a single clause and accepts iff at least one bit is set.
/// States: q0, scan_no, scan_yes, back_no, back_yes, acc, rej.
pub fn sat_stub() -> TMDescription {
    TMDescription::new(
        7,
        &[],
        0,
        5,
        6,
        &[
            (0, O, 1, B, Dir::R),
            (0, I, 2, B, Dir::R),
            (0, B, 6, B, Dir::R),
            (1, O, 1, O, Dir::R),
            (1, I, 2, I, Dir::R),
            (1, B, 3, B, Dir::L),
            (2, O, 2, O, Dir::R),
            (2, I, 2, I, Dir::R),
            (2, B, 4, B, Dir::L),
            (3, O, 3, O, Dir::L),
            (3, I, 3, I, Dir::L),
            (3, B, 6, B, Dir::R),
            (4, O, 4, O, Dir::L),
            (4, I, 4, I, Dir::L),
            (4, B, 5, B, Dir::R),
        ],
    )
    .unwrap()
}

/// The six deciders the tableau criteria sweep.
pub fn deciders() -> Vec<(&'static str, TMDescription)> {
    vec![
        ("accept-all", accept_all()),
        ("reject-all", reject_all()),
        ("bit-flip", bit_flip()),
        ("parity", parity()),
        ("copier", copier2()),
        ("sat-stub", sat_stub()),
    ]
}

/// Transducer that flips every bit and halts; output is the flipped string.
pub fn bit_flip_transducer() -> TMDescription {
    TMDescription::new(
        2,
        &[],
        0,
        1,
        1,
        &[
            (0, O, 0, I, Dir::R),
            (0, I, 0, O, Dir::R),
            (0, B, 1, B, Dir::L),
        ],
    )
    .unwrap()
}

/// Transducer that echoes its input unchanged.
pub fn echo_transducer() -> TMDescription {
    TMDescription::new(
        2,
        &[],
        0,
        1,
        1,
        &[
            (0, O, 0, O, Dir::R),
            (0, I, 0, I, Dir::R),
            (0, B, 1, B, Dir::L),
        ],
    )
    .unwrap()
}

/// Never halts; always times out.
pub fn looper() -> TMDescription {
    TMDescription::new(
        3,
        &[],
        0,
        1,
        2,
        &[
            (0, O, 0, O, Dir::R),
            (0, I, 0, I, Dir::R),
            (0, B, 0, B, Dir::R),
        ],
    )
    .unwrap()
}

/// Walks to the end of the input and accepts there: n+1 steps on length-n
/// input, so it times out under bound n.
pub fn scan_right_accept() -> TMDescription {
    TMDescription::new(
        3,
        &[],
        0,
        1,
        2,
        &[
            (0, O, 0, O, Dir::R),
            (0, I, 0, I, Dir::R),
            (0, B, 1, B, Dir::R),
        ],
    )
    .unwrap()
}

/// Transducer that ignores its input, writes the given bit string, erases
/// the rest of the input, and halts. Output is exactly `text`.
pub fn print_machine(text: &str) -> TMDescription {
    assert!(
        !text.is_empty() && text.bytes().all(|b| b == b'0' || b == b'1'),
        "print machine writes a non-empty bit string"
    );
    let n = text.len();
    // States: 0..n writers, n eraser, n+1 halt.
    let eraser = n;
    let halt = n + 1;
    let mut transitions = Vec::new();
    for (i, ch) in text.bytes().enumerate() {
        let written = if ch == b'1' { I } else { O };
        for s in [O, I, B] {
            transitions.push((i, s, i + 1, written, Dir::R));
        }
    }
    transitions.push((eraser, O, eraser, B, Dir::R));
    transitions.push((eraser, I, eraser, B, Dir::R));
    transitions.push((eraser, B, halt, B, Dir::L));
    TMDescription::new(n + 2, &[], 0, halt, halt, &transitions).unwrap()
}

/// Every named machine, for broad sweeps.
pub fn all_named() -> Vec<(&'static str, TMDescription)> {
    let mut v = deciders();
    v.push(("bit-flip-transducer", bit_flip_transducer()));
    v.push(("echo", echo_transducer()));
    v.push(("looper", looper()));
    v.push(("scan-right", scan_right_accept()));
    v
}

/// Looks a machine up by CLI name.
pub fn by_name(name: &str) -> Option<TMDescription> {
    all_named()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, m)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tm::{run_bounded, VerdictKind};

    fn accepts(m: &TMDescription, input: &str, bound: u64) -> bool {
        let (v, _) = run_bounded(m, input, bound, false).unwrap();
        v.accepts()
    }

    #[test]
    fn parity_decides_evenness_of_ones() {
        let m = parity();
        for n in 1..=6usize {
            for bits in 0..(1u32 << n) {
                let input: String = (0..n)
                    .map(|i| if bits >> (n - 1 - i) & 1 == 1 { '1' } else { '0' })
                    .collect();
                let ones = input.bytes().filter(|&b| b == b'1').count();
                assert_eq!(
                    accepts(&m, &input, 4 * n as u64 + 8),
                    ones % 2 == 0,
                    "input {input}"
                );
            }
        }
    }

    #[test]
    fn sat_stub_accepts_iff_some_one() {
        let m = sat_stub();
        for input in ["0", "1", "000", "010", "1111", "0001"] {
            let expect = input.contains('1');
            assert_eq!(accepts(&m, input, 64), expect, "input {input}");
        }
    }

    #[test]
    fn copier_shifts_input_right() {
        let m = copier2();
        let (v, trace) = run_bounded(&m, "1011", 64, true).unwrap();
        assert_eq!(v.kind, VerdictKind::Accept);
        let last = trace.unwrap().into_iter().last().unwrap();
        assert_eq!(last.tape_string(&m), "1011");
        // Shifted one cell right: cell 0 blank, cells 1..=4 hold the input.
        assert_eq!(last.left, vec![SYM_BLANK]);
    }

    #[test]
    fn print_machine_emits_constant() {
        for text in ["0", "1", "1101", "0001101"] {
            let m = print_machine(text);
            // Output must be independent of the input.
            for input in ["", "1", "111111111", "000"] {
                let (v, _) = run_bounded(&m, input, 10_000, false).unwrap();
                assert_eq!(v.kind, VerdictKind::Output(text.into()), "print {text} on {input:?}");
            }
        }
    }

    #[test]
    fn deciders_park_on_cell_one() {
        // Each decider halts with exactly one symbol left of the head.
        for (name, m) in deciders() {
            for input in ["01", "110", "1010", "00000", "11111"] {
                let (v, trace) = run_bounded(&m, input, 256, true).unwrap();
                if matches!(v.kind, VerdictKind::Accept | VerdictKind::Reject) {
                    let last = trace.unwrap().into_iter().last().unwrap();
                    assert_eq!(last.left.len(), 1, "{name} on {input}");
                }
            }
        }
    }
}
