//! A tiny register machine and a step-bounded interpreter. Halting streams
//! publish `halts` atoms once the interpreter has confirmed them within the
//! day's step budget, and refute step-bounded halting claims once the bound
//! has been exhausted without halting.

use super::DeductionError;
use crate::logic::{Sentence, TheoryFragment};
use crate::template::{bind_n, IndexExpr, SentenceTemplate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    Inc(usize),
    /// Decrement, saturating at zero.
    Dec(usize),
    /// Jump to the target when the register is zero.
    Jz(usize, usize),
    Jmp(usize),
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub program: Vec<Instr>,
    pub registers: Vec<u64>,
}

/// Runs at most `max_steps` instructions; `Some(steps)` when the machine
/// halted. Falling off the end of the program counts as halting.
pub fn run_bounded(m: &Machine, max_steps: u64) -> Option<u64> {
    let mut regs = m.registers.clone();
    let mut pc = 0usize;
    let mut steps = 0u64;
    let reg = |regs: &mut Vec<u64>, r: usize| {
        if regs.len() <= r {
            regs.resize(r + 1, 0);
        }
    };
    loop {
        let Some(instr) = m.program.get(pc) else {
            return Some(steps);
        };
        if steps == max_steps {
            return None;
        }
        steps += 1;
        match *instr {
            Instr::Halt => return Some(steps),
            Instr::Inc(r) => {
                reg(&mut regs, r);
                regs[r] = regs[r].saturating_add(1);
                pc += 1;
            }
            Instr::Dec(r) => {
                reg(&mut regs, r);
                regs[r] = regs[r].saturating_sub(1);
                pc += 1;
            }
            Instr::Jz(r, target) => {
                reg(&mut regs, r);
                pc = if regs[r] == 0 { target } else { pc + 1 };
            }
            Instr::Jmp(target) => pc = target,
        }
    }
}

/// Index-parameterized machine families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineFamily {
    /// Counts register 0 down from `scale * n`; halts after `3·scale·n + 2` steps.
    Countdown { scale: u64 },
    /// Never halts.
    Loop,
}

impl MachineFamily {
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        if t == "loop" {
            return Some(MachineFamily::Loop);
        }
        if t == "countdown" {
            return Some(MachineFamily::Countdown { scale: 1 });
        }
        let scale = t.strip_prefix("countdown*")?.trim().parse().ok()?;
        Some(MachineFamily::Countdown { scale })
    }

    pub fn machine(&self, n: u64) -> Machine {
        match self {
            MachineFamily::Countdown { scale } => Machine {
                program: vec![Instr::Jz(0, 3), Instr::Dec(0), Instr::Jmp(0), Instr::Halt],
                registers: vec![scale.saturating_mul(n)],
            },
            MachineFamily::Loop => Machine {
                program: vec![Instr::Inc(0), Instr::Jmp(0)],
                registers: vec![0],
            },
        }
    }
}

/// Generator for halting facts about a machine family.
///
/// On day `m` the interpreter gets `steps_per_day * m` steps per machine
/// `k <= m`. With no `step_bound`, the atom means "machine k halts" and is
/// published once a halt is observed. With a `step_bound` g, the atom means
/// "machine k halts within g(k) steps": it is published when the halt
/// happens within g(k) steps and refuted once g(k) steps ran without one.
#[derive(Debug, Clone)]
pub struct HaltingStream {
    pub atom: SentenceTemplate,
    pub family: MachineFamily,
    pub step_bound: Option<IndexExpr>,
    pub steps_per_day: u64,
}

impl HaltingStream {
    /// Decision for index `k` given `budget` interpreter steps.
    pub fn decide(&self, k: u64, budget: u64) -> Result<Option<bool>, DeductionError> {
        let machine = self.family.machine(k);
        let bound = match &self.step_bound {
            Some(e) => Some(e.eval(&bind_n(k as i64))?.max(0) as u64),
            None => None,
        };
        let limit = bound.map_or(budget, |b| b.min(budget));
        Ok(match (run_bounded(&machine, limit), bound) {
            (Some(_), _) => Some(true),
            (None, Some(b)) if b <= budget => Some(false),
            _ => None,
        })
    }

    pub fn fragment(&self, m: u64) -> Result<TheoryFragment, DeductionError> {
        let budget = self.steps_per_day.saturating_mul(m);
        let mut out = TheoryFragment::new();
        for k in 1..=m {
            let Some(atom) = self.atom.at(k as i64)? else {
                continue;
            };
            match self.decide(k, budget)? {
                Some(true) => {
                    out.insert(atom);
                }
                Some(false) => {
                    out.insert(Sentence::not(atom));
                }
                None => {}
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn countdown_halts_after_linear_steps() {
        let m = MachineFamily::Countdown { scale: 1 }.machine(5);
        assert_eq!(run_bounded(&m, 1000), Some(17));
        assert_eq!(run_bounded(&m, 16), None);
        assert_eq!(run_bounded(&MachineFamily::Loop.machine(1), 10_000), None);
    }

    #[test]
    fn family_names_parse() {
        assert_eq!(MachineFamily::parse("loop"), Some(MachineFamily::Loop));
        assert_eq!(
            MachineFamily::parse("countdown*1000"),
            Some(MachineFamily::Countdown { scale: 1000 })
        );
        assert_eq!(MachineFamily::parse("tape"), None);
    }

    #[test]
    fn empty_program_halts_immediately() {
        let m = Machine {
            program: vec![],
            registers: vec![],
        };
        assert_eq!(run_bounded(&m, 0), Some(0));
    }
}
