//! A small arithmetic interpreter used as an independent second evaluation
//! of the constants report. It shares no code with the library: formulas
//! are typed as text and the Gauss Pi function comes from a Stirling series.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(s.parse().expect("number literal")));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else {
            out.push(Tok::Op(c));
            i += 1;
        }
    }
    out
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    env: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // sum := product (('+' | '-') product)*
    fn sum(&mut self) -> f64 {
        let mut v = self.product();
        loop {
            if self.eat('+') {
                v += self.product();
            } else if self.eat('-') {
                v -= self.product();
            } else {
                return v;
            }
        }
    }

    // product := unary (('*' | '/') unary)*
    fn product(&mut self) -> f64 {
        let mut v = self.unary();
        loop {
            if self.eat('*') {
                v *= self.unary();
            } else if self.eat('/') {
                v /= self.unary();
            } else {
                return v;
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> f64 {
        if self.eat('-') {
            -self.unary()
        } else {
            self.power()
        }
    }

    // power := atom ('^' unary)?   (right associative)
    fn power(&mut self) -> f64 {
        let base = self.atom();
        if self.eat('^') {
            let e = self.unary();
            pow(base, e)
        } else {
            base
        }
    }

    fn atom(&mut self) -> f64 {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                x
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.sum();
                assert!(self.eat(')'), "expected )");
                v
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let mut args = vec![self.sum()];
                    while self.eat(',') {
                        args.push(self.sum());
                    }
                    assert!(self.eat(')'), "expected ) after arguments of {name}");
                    call(&name, &args)
                } else {
                    match name.as_str() {
                        "pi" => std::f64::consts::PI,
                        "e" => std::f64::consts::E,
                        _ => *self.env.get(&name).unwrap_or_else(|| panic!("unbound {name}")),
                    }
                }
            }
            other => panic!("unexpected token {other:?}"),
        }
    }
}

/// Integer exponents by repeated squaring, others through `exp(e ln b)`.
fn pow(b: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 64.0 {
        let mut n = e.abs() as u32;
        let mut acc = 1.0;
        let mut x = b;
        while n > 0 {
            if n & 1 == 1 {
                acc *= x;
            }
            x *= x;
            n >>= 1;
        }
        if e < 0.0 {
            1.0 / acc
        } else {
            acc
        }
    } else {
        assert!(b > 0.0, "non-integer power of {b}");
        (e * b.ln()).exp()
    }
}

fn call(name: &str, args: &[f64]) -> f64 {
    match (name, args) {
        ("exp", [x]) => x.exp(),
        ("sqrt", [x]) => x.sqrt(),
        ("Pi", [z]) => gauss_pi(*z),
        ("max", [first, rest @ ..]) => rest.iter().fold(*first, |a, b| a.max(*b)),
        ("min", [first, rest @ ..]) => rest.iter().fold(*first, |a, b| a.min(*b)),
        _ => panic!("unknown function {name}/{}", args.len()),
    }
}

/// `ln Gamma(z)` for `z >= 20` by the Stirling series.
fn ln_gamma_large(z: f64) -> f64 {
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
    ];
    let zi = 1.0 / z;
    let z2 = zi * zi;
    let mut series = 0.0;
    let mut p = zi;
    for b in B {
        series += b * p;
        p *= z2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// `Pi(z) = Gamma(z + 1)`, shifting the argument up before the series.
pub fn gauss_pi(z: f64) -> f64 {
    let x = z + 1.0;
    assert!(x > 0.0, "Pi({z}) outside the supported range");
    let shift = 24;
    let mut denom = 1.0;
    for k in 0..shift {
        denom *= x + k as f64;
    }
    ln_gamma_large(x + shift as f64).exp() / denom
}

/// Evaluate `name = expr` lines in order; later lines see earlier names.
pub fn evaluate(program: &str, inputs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    let mut env: BTreeMap<String, f64> = inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for line in program.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (name, expr) = line.split_once('=').expect("assignment");
        let mut p = Parser {
            toks: lex(expr),
            pos: 0,
            env: &env,
        };
        let v = p.sum();
        assert_eq!(p.pos, p.toks.len(), "trailing tokens in {line}");
        env.insert(name.trim().to_string(), v);
    }
    env
}

/// Every formula of the constants report, written out from the closed forms.
pub const CONSTANTS_PROGRAM: &str = "
    b_lambda = Pi(-lambda/2) * b0
    c_tau = 2 * pi^(3/2) * Pi(-lambda/2) * tau^(-(3-lambda)/2) * b0
    c_sigma = 2 * pi^(3/2) * Pi(-lambda/2) * sigma^(-(3-lambda)/2) * b0
    c_tau1 = 2 * pi^(3/2) * Pi(-lambda/2) * tau1^(-(3-lambda)/2) * b0
    g_bound_tau = pi^(3/2) * Pi(-lambda/2) * tau^(-(3-lambda)/2)
    k12 = 2^(5/2) * pi^(3/2) * e^(-1/2) * b_lambda * (tau-sigma)^(-1/2) * sigma^(-(3-lambda)/2) * R * max(R, M)
    k22 = (2*pi)^4 * b_lambda * tau^(-7/2) * sigma^(-(3-lambda)/2) * R * max(R, M)
    k13 = c_sigma * M * R
    k23 = 2 * pi^(9/2) * b_lambda * tau^(-(9-lambda)/2) * M * R
    k14 = 2^(3/2) * e^(-1/2) * pi^(3/2) * b_lambda * tau^(-(3-lambda)/2) * (tau-sigma)^(-1/2) * max(R^2, M*(2*R+M))
    k24 = 8 * pi^4 * b_lambda * tau^(-(10-lambda)/2) * max(R^2, M*(2*R+M))
    k15 = 2 * c_sigma * R
    k25 = 2 * c_sigma * R
    k1 = max(k12, k13, k14, k15)
    k2 = max(k22, k23, k24, k25)
    d1 = 2^(1/2) * e^(-1/2) * (tau-sigma)^(-1/2) * max(R, M) + c_sigma * R^2
    d2 = 4 * pi^(5/2) * tau^(-7/2) * max(R, M) + c_sigma * (pi/sigma)^3 * R^2
    growth_k = k1 * (2 + d1) * max(1, 1/(c_sigma*R))
    rho = 1 / (c_sigma * T)
    c_at = growth_k / (c_sigma * R) * exp(c_sigma * T * (R + rho + R))
    x0 = rho / c_at / 2
    t0 = rho / c_at - x0
    d0 = c_sigma * (R + rho) / 2
    t_star = min(t0, 1/d0, 1, T)
    theta = tau1 * ((2 + T^2) - sqrt(T^4 + 4*T^2)) / 2
    lipschitz_m = M0 * (1 + (exp(2*c_tau1*R*T) - 1) / 2 * (1 + exp(taus^2/(taus-tau1))))
    r_star = c_tau * R^2
    m_star = c_tau * M * (2*R + M)
    kt1 = c_sigma * (2*R + rho)
    kt2 = k2 * (3 + d2) / 2
    big_k = kt2 / kt1 * exp(kt1 * T)
    big_k1 = d2 + big_k
    big_k2 = big_k
";

/// Map from report paths to oracle variable names.
pub const REPORT_PATHS: &[(&str, &str)] = &[
    ("b_lambda", "b_lambda"),
    ("c_tau", "c_tau"),
    ("c_sigma", "c_sigma"),
    ("c_tau1", "c_tau1"),
    ("g_bound_tau", "g_bound_tau"),
    ("key.k12", "k12"),
    ("key.k22", "k22"),
    ("key.k13", "k13"),
    ("key.k23", "k23"),
    ("key.k14", "k14"),
    ("key.k24", "k24"),
    ("key.k15", "k15"),
    ("key.k25", "k25"),
    ("key.k1", "k1"),
    ("key.k2", "k2"),
    ("d1", "d1"),
    ("d2", "d2"),
    ("stability.growth.k", "growth_k"),
    ("stability.growth.c_sigma", "c_sigma"),
    ("stability.growth.r", "R"),
    ("stability.growth.t", "T"),
    ("stability.rho", "rho"),
    ("stability.c_at", "c_at"),
    ("stability.x0", "x0"),
    ("stability.t0", "t0"),
    ("stability.d0", "d0"),
    ("stability.t_star", "t_star"),
    ("theta", "theta"),
    ("lipschitz_m", "lipschitz_m"),
    ("r_star", "r_star"),
    ("m_star", "m_star"),
    ("convergence.k_tilde1", "kt1"),
    ("convergence.k_tilde2", "kt2"),
    ("convergence.k", "big_k"),
    ("convergence.k1", "big_k1"),
    ("convergence.k2", "big_k2"),
    ("inputs.r", "R"),
    ("inputs.m", "M"),
    ("inputs.t", "T"),
    ("inputs.tau", "tau"),
    ("inputs.sigma", "sigma"),
    ("inputs.tau1", "tau1"),
    ("inputs.tau_star", "taus"),
    ("inputs.m0", "M0"),
    ("inputs.b0", "b0"),
    ("inputs.lambda", "lambda"),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpreter_basics() {
        let env = evaluate("a = 2^3^2\nb = -a/4 + max(1, 7, 3)\nc = Pi(0.5)^2", &[]);
        assert_eq!(env["a"], 512.0);
        assert_eq!(env["b"], -121.0);
        assert!((env["c"] / (std::f64::consts::PI / 4.0) - 1.0).abs() < 1e-13);
    }
}
