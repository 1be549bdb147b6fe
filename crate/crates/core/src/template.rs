//! Lorenz-like templates `L(m, n)` and `L*(m, n)`: symbolic orbits of the
//! full 2-shift, the universality criterion, and conversion of orbit words
//! to braids and to embedded closed curves.
//!
//! Strands on the branch line are ordered by the lexicographic order of the
//! (infinite, periodic) itineraries with `x < y`. Twists are signed full
//! twists of an ear's strand block, positive meaning positive generators.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knotinv::PLCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    X,
    Y,
}

impl Symbol {
    fn as_char(self) -> char {
        match self {
            Symbol::X => 'x',
            Symbol::Y => 'y',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemplateSpec {
    pub m: i64,
    pub n: i64,
    pub starred: bool,
}

impl TemplateSpec {
    /// Sign shared by every branch-line crossing.
    pub fn crossing_sign(&self) -> i32 {
        if self.starred {
            -1
        } else {
            1
        }
    }

    /// `(-m, -n, !starred)`.
    pub fn mirror(&self) -> Self {
        lorenz_like(-self.m, -self.n, !self.starred)
    }
}

impl fmt::Display for TemplateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let star = if self.starred { "*" } else { "" };
        write!(f, "L{star}({}, {})", self.m, self.n)
    }
}

pub fn lorenz_like(m: i64, n: i64, starred: bool) -> TemplateSpec {
    TemplateSpec { m, n, starred }
}

/// Periodic orbit of the 2-shift, stored as its least rotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CyclicWord {
    symbols: Vec<Symbol>,
    aperiodic: bool,
}

impl CyclicWord {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidInput("empty word".into()));
        }
        let k = symbols.len();
        let best = (0..k).min_by(|&a, &b| rotation_cmp(&symbols, a, b)).unwrap();
        let canon: Vec<Symbol> = (0..k).map(|i| symbols[(best + i) % k]).collect();
        let aperiodic = smallest_period(&canon) == k;
        Ok(Self {
            symbols: canon,
            aperiodic,
        })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_aperiodic(&self) -> bool {
        self.aperiodic
    }

    /// Number of `y` symbols (passes through the `y` ear).
    pub fn y_count(&self) -> usize {
        self.symbols.iter().filter(|s| **s == Symbol::Y).count()
    }

    fn require_aperiodic(&self) -> Result<()> {
        if self.aperiodic {
            Ok(())
        } else {
            Err(Error::PeriodicWord(self.to_string()))
        }
    }
}

fn rotation_cmp(w: &[Symbol], a: usize, b: usize) -> Ordering {
    let k = w.len();
    (0..k).map(|i| w[(a + i) % k]).cmp((0..k).map(|i| w[(b + i) % k]))
}

fn smallest_period(w: &[Symbol]) -> usize {
    let k = w.len();
    (1..=k).find(|&p| k % p == 0 && (0..k).all(|i| w[i] == w[i % p])).unwrap()
}

impl FromStr for CyclicWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .trim()
            .chars()
            .map(|c| match c {
                'x' | 'X' => Ok(Symbol::X),
                'y' | 'Y' => Ok(Symbol::Y),
                other => Err(Error::InvalidInput(format!("word symbol must be x or y, got {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }
}

impl TryFrom<String> for CyclicWord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CyclicWord> for String {
    fn from(w: CyclicWord) -> String {
        w.to_string()
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

/// Aperiodic necklaces of length `<= max_len`, sorted by length and then
/// lexicographically. Generated as Lyndon words (Duval's algorithm).
pub fn enumerate_words(max_len: usize) -> Vec<CyclicWord> {
    let mut out: Vec<Vec<Symbol>> = Vec::new();
    if max_len == 0 {
        return Vec::new();
    }
    let mut w = vec![Symbol::X];
    loop {
        out.push(w.clone());
        let k = w.len();
        // extend periodically to max_len, then drop trailing maximal symbols
        while w.len() < max_len {
            w.push(w[w.len() - k]);
        }
        while w.last() == Some(&Symbol::Y) {
            w.pop();
        }
        let Some(last) = w.last_mut() else { break };
        *last = Symbol::Y;
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.into_iter()
        .map(|symbols| CyclicWord {
            symbols,
            aperiodic: true,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Universality {
    Universal,
    NotUniversal,
    Unknown,
}

/// Universality of `L(m, n)` when `mn >= 0`: universal iff `mn = 0` and
/// `m + n < 0`. `L*(m, n)` is decided through its mirror `L(-m, -n)`.
pub fn universal_predicate(m: i64, n: i64, starred: bool) -> Universality {
    let (m, n) = if starred { (-m, -n) } else { (m, n) };
    match (m * n).signum() {
        -1 => Universality::Unknown,
        _ if m * n == 0 && m + n < 0 => Universality::Universal,
        _ => Universality::NotUniversal,
    }
}

/// Braid word over Artin generators; letter `+i` is `sigma_i`, `-i` its
/// inverse, with `1 <= i < strands`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraidWord {
    pub strands: usize,
    pub letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<i32>) -> Result<Self> {
        if strands == 0 {
            return Err(Error::InvalidInput("a braid needs at least one strand".into()));
        }
        if let Some(bad) = letters.iter().find(|l| **l == 0 || l.unsigned_abs() as usize >= strands) {
            return Err(Error::InvalidInput(format!("generator {bad} out of range for {strands} strands")));
        }
        Ok(Self { strands, letters })
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.signum() as i64).sum()
    }

    pub fn crossing_count(&self) -> usize {
        self.letters.len()
    }

    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|l| *l > 0)
    }

    pub fn is_negative(&self) -> bool {
        self.letters.iter().all(|l| *l < 0)
    }

    /// `perm[j]` is the bottom position of the strand starting at `j`.
    pub fn permutation(&self) -> Vec<usize> {
        // slot[p] = starting position of the strand now at p
        let mut slot: Vec<usize> = (0..self.strands).collect();
        for l in &self.letters {
            let i = l.unsigned_abs() as usize;
            slot.swap(i - 1, i);
        }
        let mut perm = vec![0; self.strands];
        for (p, s) in slot.iter().enumerate() {
            perm[*s] = p;
        }
        perm
    }

    /// Number of components of the closure.
    pub fn components(&self) -> usize {
        cycles(&self.permutation()).len()
    }

    /// Letters with every sign flipped.
    pub fn mirror(&self) -> Self {
        Self {
            strands: self.strands,
            letters: self.letters.iter().map(|l| -l).collect(),
        }
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| if *l > 0 { format!("s{l}") } else { format!("s{}^-1", -l) })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub(crate) fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut j = s;
        while !seen[j] {
            seen[j] = true;
            c.push(j);
            j = perm[j];
        }
        out.push(c);
    }
    out
}

/// Compare the infinite periodic sequences `a^inf` and `b^inf`; two distinct
/// ones differ within the first `|a| + |b|` symbols.
fn periodic_cmp(a: &[Symbol], b: &[Symbol]) -> Ordering {
    let len = a.len() + b.len();
    (0..len).map(|i| a[i % a.len()]).cmp((0..len).map(|i| b[i % b.len()]))
}

/// Branch-line strands of a collection of orbits.
struct Strands {
    /// (word index, rotation offset), in branch-line order.
    order: Vec<(usize, usize)>,
    /// Target slot of each slot under the shift.
    shift: Vec<usize>,
    x_count: usize,
}

fn strands_of(words: &[&CyclicWord]) -> Strands {
    let rot = |(w, r): (usize, usize)| -> Vec<Symbol> {
        let s = words[w].symbols();
        (0..s.len()).map(|i| s[(r + i) % s.len()]).collect()
    };
    let mut order: Vec<(usize, usize)> = words.iter().enumerate().flat_map(|(w, word)| (0..word.len()).map(move |r| (w, r))).collect();
    let keys: Vec<Vec<Symbol>> = order.iter().map(|&k| rot(k)).collect();
    let mut idx: Vec<usize> = (0..order.len()).collect();
    idx.sort_by(|&a, &b| periodic_cmp(&keys[a], &keys[b]));
    order = idx.iter().map(|&i| order[i]).collect();
    let pos = |key: (usize, usize)| order.iter().position(|k| *k == key).unwrap();
    let shift = order.iter().map(|&(w, r)| pos((w, (r + 1) % words[w].len()))).collect();
    let x_count = order.iter().filter(|&&(w, r)| words[w].symbols()[r] == Symbol::X).count();
    Strands { order, shift, x_count }
}

/// Full twist `(sigma_{o+1} ... sigma_{o+b-1})^b` on slots `o..o+b`, raised to `power`.
fn full_twist(offset: usize, block: usize, power: i64, out: &mut Vec<i32>) {
    if block < 2 || power == 0 {
        return;
    }
    let sign = power.signum() as i32;
    for _ in 0..power.unsigned_abs() * block as u64 {
        for i in 1..block {
            out.push(sign * (offset + i) as i32);
        }
    }
}

/// Positive permutation braid moving slot `j` to `perm[j]`, by bubble sort.
fn permutation_braid(perm: &[usize], sign: i32, out: &mut Vec<i32>) {
    let mut arr = perm.to_vec();
    let n = arr.len();
    for pass in 0..n {
        let mut swapped = false;
        for j in 0..n.saturating_sub(1 + pass) {
            if arr[j] > arr[j + 1] {
                arr.swap(j, j + 1);
                out.push(sign * (j + 1) as i32);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
}

/// Braid of a set of orbits, with the orbit index of the strand starting
/// in each slot.
fn link_braid(t: &TemplateSpec, words: &[&CyclicWord]) -> Result<(BraidWord, Vec<usize>)> {
    for w in words {
        w.require_aperiodic()?;
    }
    let st = strands_of(words);
    let k = st.order.len();
    let mut letters = Vec::new();
    full_twist(0, st.x_count, t.m, &mut letters);
    full_twist(st.x_count, k - st.x_count, t.n, &mut letters);
    permutation_braid(&st.shift, t.crossing_sign(), &mut letters);
    let labels = st.order.iter().map(|&(w, _)| w).collect();
    Ok((BraidWord { strands: k, letters }, labels))
}

/// Braid whose closure is the orbit `w` on the template `t`.
pub fn word_to_braid(t: &TemplateSpec, w: &CyclicWord) -> Result<BraidWord> {
    link_braid(t, &[w]).map(|(b, _)| b)
}

/// Braid of several distinct orbits together, with the orbit index of the
/// strand starting in each slot.
pub fn words_to_braid(t: &TemplateSpec, words: &[&CyclicWord]) -> Result<(BraidWord, Vec<usize>)> {
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            if a == b {
                return Err(Error::SameOrbit(a.to_string(), b.to_string()));
            }
        }
    }
    link_braid(t, words)
}

/// Half the signed count of crossings between the two orbits.
pub fn pair_linking(t: &TemplateSpec, w1: &CyclicWord, w2: &CyclicWord) -> Result<i64> {
    let (b, labels) = words_to_braid(t, &[w1, w2])?;
    Ok(inter_component_crossings(&b, &labels) / 2)
}

/// Signed sum of crossings whose strands carry different labels.
pub(crate) fn inter_component_crossings(b: &BraidWord, labels: &[usize]) -> i64 {
    let mut at = labels.to_vec();
    let mut sum = 0;
    for l in &b.letters {
        let i = l.unsigned_abs() as usize;
        if at[i - 1] != at[i] {
            sum += l.signum() as i64;
        }
        at.swap(i - 1, i);
    }
    sum
}

/// Embedding parameters of closed braids around the `z`-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveGeometry {
    /// Radius of the innermost slot.
    pub radius: f64,
    /// Radial distance between neighbouring slots.
    pub spacing: f64,
    /// Height of the over/under offset at a crossing.
    pub clearance: f64,
    /// Vertices per braid letter and per strand.
    pub samples_per_arc: usize,
}

impl Default for CurveGeometry {
    fn default() -> Self {
        Self {
            radius: 3.0,
            spacing: 0.5,
            clearance: 0.25,
            samples_per_arc: 8,
        }
    }
}

/// Closed polyline of the orbit `w`, as the closure of its braid.
pub fn word_to_curve(t: &TemplateSpec, w: &CyclicWord, geometry: &CurveGeometry) -> Result<PLCurve> {
    let b = word_to_braid(t, w)?;
    Ok(braid_closure_curves(&b, &vec![0; b.strands], geometry)?.remove(0))
}

/// One closed polyline per orbit, embedded together.
pub fn words_to_curves(t: &TemplateSpec, words: &[&CyclicWord], geometry: &CurveGeometry) -> Result<Vec<PLCurve>> {
    let (b, labels) = words_to_braid(t, words)?;
    let mut curves = braid_closure_curves(&b, &labels, geometry)?;
    // components come out ordered by first slot; return them in word order
    let mut first_slot: Vec<(usize, usize)> = (0..words.len()).map(|w| (labels.iter().position(|l| *l == w).unwrap(), w)).collect();
    first_slot.sort();
    let mut out = vec![None; words.len()];
    for ((_, w), c) in first_slot.into_iter().zip(curves.drain(..)) {
        out[w] = Some(c);
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Geometric closure of `b`: slot `p` runs at radius `radius + p spacing`,
/// the braid advances with the angle around the `z`-axis, and at a letter the
/// two strands exchange slots with vertical offsets `+-clearance`. A
/// positive letter lifts the strand moving outward, which makes it a
/// positive crossing for the orientation of increasing angle.
pub fn braid_closure_curves(b: &BraidWord, labels: &[usize], geometry: &CurveGeometry) -> Result<Vec<PLCurve>> {
    let spa = geometry.samples_per_arc.max(2);
    let n_letters = b.letters.len().max(1);
    let k = b.strands;
    // trace every starting slot through the braid: positions per letter boundary
    let mut tracks: Vec<Vec<[f64; 3]>> = vec![Vec::new(); k];
    let mut slot_of: Vec<usize> = (0..k).collect(); // strand (start slot) -> current slot
    let mut strand_at: Vec<usize> = (0..k).collect(); // current slot -> strand
    for step in 0..n_letters {
        let letter = b.letters.get(step).copied();
        for q in 0..spa {
            let s = q as f64 / spa as f64;
            let phi = TAU * (step as f64 + s) / n_letters as f64;
            for strand in 0..k {
                let p = slot_of[strand] as f64;
                let (rho, z) = match letter {
                    Some(l) => {
                        let i = l.unsigned_abs() as usize;
                        let bump = geometry.clearance * (std::f64::consts::PI * s).sin();
                        let smooth = s * s * (3.0 - 2.0 * s);
                        if slot_of[strand] == i - 1 {
                            (p + smooth, l.signum() as f64 * bump)
                        } else if slot_of[strand] == i {
                            (p - smooth, -l.signum() as f64 * bump)
                        } else {
                            (p, 0.0)
                        }
                    }
                    None => (p, 0.0),
                };
                let r = geometry.radius + rho * geometry.spacing;
                tracks[strand].push([r * phi.cos(), r * phi.sin(), z]);
            }
        }
        if let Some(l) = letter {
            let i = l.unsigned_abs() as usize;
            strand_at.swap(i - 1, i);
            slot_of[strand_at[i - 1]] = i - 1;
            slot_of[strand_at[i]] = i;
        }
    }
    // closure: the strand ending in slot p continues as the strand starting in p
    let perm = b.permutation();
    let mut curves = Vec::new();
    for cyc in cycles(&perm) {
        let mut verts = Vec::new();
        for &s in &cyc {
            verts.extend_from_slice(&tracks[s]);
        }
        if cyc.iter().any(|s| labels[*s] != labels[cyc[0]]) {
            return Err(Error::InvalidInput("strand labels disagree along a component".into()));
        }
        curves.push(PLCurve::new(verts)?);
    }
    Ok(curves)
}
