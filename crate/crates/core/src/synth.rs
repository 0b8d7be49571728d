//! Seeded random scenarios and scripts, written in the surface syntax so
//! that every generated case also exercises the parser.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ATOMS: [&str; 6] = ["p", "q", "r", "rain", "party", "deadline"];
const ACTS: [&str; 4] = ["help", "call", "visit", "gift"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub seed: u64,
    pub scenario: String,
    pub script: String,
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn unit(&mut self) -> String {
        // certainty above one half, two decimals
        format!("{:.2}", self.rng.gen_range(51..=100) as f64 / 100.0)
    }

    fn signed(&mut self) -> String {
        let mut k = self.rng.gen_range(-100..=100);
        if k == 0 {
            k = 1;
        }
        format!("{:.2}", k as f64 / 100.0)
    }

    fn atom(&mut self) -> &'static str {
        ATOMS.choose(&mut self.rng).expect("nonempty")
    }

    fn act(&mut self) -> &'static str {
        ACTS.choose(&mut self.rng).expect("nonempty")
    }

    fn fact(&mut self) -> String {
        let (l, k, a, b) = (self.unit(), self.signed(), self.atom(), self.atom());
        match self.rng.gen_range(0..12) {
            0 => format!("Bel(M,{l},{a})"),
            1 => format!("Des(M,{k},{a})"),
            2 => format!("Att(M,{k},{a})"),
            3 => format!("Ideal(M,{k},{a})"),
            4 => format!("Bel(M,{l},{a} -> {b})"),
            5 => format!("Bel(M,{l},<M,J,{}> -> F({a}))", self.act()),
            6 => format!("Bel(M,{l},Des(J,{k},{a}))"),
            7 => format!("Bel(M,{l},Att(J,{k},{a}))"),
            8 => format!("Bel(M,{l},Ideal(J,{k},{a}))"),
            9 => format!("Bel(M,{l},Bel(J,{},{a}))", self.unit()),
            10 => format!("Bel(M,{l},<M,J,{}> -> <M,-,{}>)", self.act(), self.act()),
            _ => format!("Des(M,{k},<M,J,{}>)", self.act()),
        }
    }

    fn event(&mut self) -> String {
        match self.rng.gen_range(0..3) {
            0 => format!("<J,M,{}>", self.act()),
            1 => format!("<J,M,Assert({})>", self.atom()),
            _ => format!("<J,M,Request(<M,J,{}>)>", self.act()),
        }
    }
}

/// A two-agent scenario with 3 to 12 facts and a script of up to 5 ticks.
pub fn generate(seed: u64) -> Generated {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let mut sc = String::new();
    let _ = writeln!(sc, "scenario synth_{seed}\nagent M J\nself M");
    let _ = writeln!(sc, "horizon {}", g.rng.gen_range(2..=6));
    let (h, d) = (g.signed(), g.signed());
    let _ = writeln!(sc, "relation M -> J like {h} dom {d}");
    let (h2, d2, l) = (g.signed(), g.signed(), g.unit());
    let _ = writeln!(sc, "fact M : Bel(M,{l},Like(J,M,{h2}))");
    let _ = writeln!(sc, "fact M : Bel(M,{l},Dom(J,M,{d2}))");
    for _ in 0..g.rng.gen_range(3..=12) {
        let f = g.fact();
        let _ = writeln!(sc, "fact M : {f}");
    }
    let mut script = String::new();
    for t in 0..g.rng.gen_range(0..=5) {
        if g.rng.gen_bool(0.6) {
            let evs: Vec<String> = (0..g.rng.gen_range(1..=2)).map(|_| g.event()).collect();
            let _ = writeln!(script, "tick {t}: {}", evs.join("; "));
        }
    }
    Generated {
        seed,
        scenario: sc,
        script,
    }
}
