//! Words over the symbol alphabet describing timeline evolution.
//!
//! A non-empty word describing a plan starts with an initial symbol naming
//! the first value of every variable, followed by step symbols.  At each
//! step a variable either keeps its token running (`Unchanged`) or switches
//! from one value to the next (`Change`).  Time is implicit: the symbol at
//! position `i` describes what happens at time `i`, and a word of length
//! `h + 1` describes a plan with horizon `h`, all running tokens closing at
//! the end of the word.
//!
//! Reading a symbol emits events (token starts and token ends); those events
//! are what synchronization rules observe.

use crate::model::{Plan, Problem, Time, Token, ValId, VarId};

/// What one variable does in a step symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepEntry {
    Unchanged,
    Change { from: ValId, to: ValId },
}

/// One letter of the alphabet.  Both variants carry one entry per variable,
/// in variable order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Initial(Vec<ValId>),
    Step(Vec<StepEntry>),
}

pub type Word = Vec<Symbol>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Start,
    End,
}

/// A token boundary observed while reading a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub kind: EventKind,
    pub var: VarId,
    pub value: ValId,
}

impl Event {
    pub fn start(var: VarId, value: ValId) -> Event {
        Event { kind: EventKind::Start, var, value }
    }

    pub fn end(var: VarId, value: ValId) -> Event {
        Event { kind: EventKind::End, var, value }
    }
}

/// A sorted, duplicate-free set of events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct EventSet(Vec<Event>);

impl EventSet {
    pub fn new(mut events: Vec<Event>) -> EventSet {
        events.sort_unstable();
        events.dedup();
        EventSet(events)
    }

    pub fn empty() -> EventSet {
        EventSet(Vec::new())
    }

    pub fn contains(&self, e: &Event) -> bool {
        self.0.binary_search(e).is_ok()
    }

    pub fn is_subset_of(&self, other: &EventSet) -> bool {
        self.0.iter().all(|e| other.contains(e))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Event> for EventSet {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> EventSet {
        EventSet::new(iter.into_iter().collect())
    }
}

/// Events emitted by reading one symbol: an initial entry emits the start of
/// the named value, a change emits the end of the outgoing value and the
/// start of the incoming one, `Unchanged` emits nothing.
pub fn events(symbol: &Symbol) -> EventSet {
    let mut out = Vec::new();
    match symbol {
        Symbol::Initial(vals) => {
            for (var, &v) in vals.iter().enumerate() {
                out.push(Event::start(var, v));
            }
        }
        Symbol::Step(entries) => {
            for (var, entry) in entries.iter().enumerate() {
                if let StepEntry::Change { from, to } = entry {
                    out.push(Event::end(var, *from));
                    out.push(Event::start(var, *to));
                }
            }
        }
    }
    EventSet::new(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("symbol {index} has {found} entries for {expected} variables")]
    Arity { index: usize, expected: usize, found: usize },
    #[error("symbol {index} must be an initial symbol")]
    ExpectedInitial { index: usize },
    #[error("symbol {index} must be a step symbol")]
    ExpectedStep { index: usize },
    #[error("symbol {index}: {var} changes from {from} but was holding {holding}")]
    Mismatch { index: usize, var: String, from: String, holding: String },
}

/// Decodes a word into the plan it describes.
///
/// This checks only the word's structure: an empty word yields the empty
/// plan, otherwise the word must be one initial symbol followed by step
/// symbols whose outgoing values match the running tokens.  Whether the
/// resulting plan respects domains and transition relations is a separate
/// question, answered by [`crate::model::validate_plan`].
pub fn decode(p: &Problem, word: &[Symbol]) -> Result<Plan, DecodeError> {
    let n = p.vars.len();
    if word.is_empty() {
        return Ok(Plan::empty(n));
    }
    let first = match &word[0] {
        Symbol::Initial(vals) if vals.len() == n => vals.clone(),
        Symbol::Initial(vals) => {
            return Err(DecodeError::Arity { index: 0, expected: n, found: vals.len() })
        }
        Symbol::Step(_) => return Err(DecodeError::ExpectedInitial { index: 0 }),
    };
    let mut timelines: Vec<Vec<Token>> = vec![Vec::new(); n];
    let mut current: Vec<ValId> = first;
    let mut since: Vec<Time> = vec![0; n];
    for (i, sym) in word.iter().enumerate().skip(1) {
        let entries = match sym {
            Symbol::Step(entries) if entries.len() == n => entries,
            Symbol::Step(entries) => {
                return Err(DecodeError::Arity { index: i, expected: n, found: entries.len() })
            }
            Symbol::Initial(_) => return Err(DecodeError::ExpectedStep { index: i }),
        };
        for (var, entry) in entries.iter().enumerate() {
            if let StepEntry::Change { from, to } = entry {
                if *from != current[var] {
                    return Err(DecodeError::Mismatch {
                        index: i,
                        var: p.vars[var].name.clone(),
                        from: p.value_name(*from).to_string(),
                        holding: p.value_name(current[var]).to_string(),
                    });
                }
                timelines[var].push(Token {
                    value: current[var],
                    duration: (i as Time) - since[var],
                });
                current[var] = *to;
                since[var] = i as Time;
            }
        }
    }
    // Running tokens close at the end of the word.
    let horizon = word.len() as Time;
    for var in 0..n {
        timelines[var].push(Token { value: current[var], duration: horizon - since[var] });
    }
    Ok(Plan { horizon, timelines })
}

/// Encodes a plan as the word [`decode`] maps back to it.  The plan must be
/// structurally valid (every timeline spanning the horizon).
pub fn encode(p: &Problem, plan: &Plan) -> Word {
    let n = p.vars.len();
    debug_assert_eq!(plan.timelines.len(), n);
    if plan.horizon == 0 {
        return Vec::new();
    }
    let mut word = vec![Symbol::Initial(
        plan.timelines.iter().map(|tl| tl[0].value).collect(),
    )];
    // For each variable, the positions where one token hands over to the next.
    let mut next_tok: Vec<usize> = vec![0; n];
    let mut boundary: Vec<Time> = plan.timelines.iter().map(|tl| tl[0].duration).collect();
    for t in 1..plan.horizon {
        let mut entries = Vec::with_capacity(n);
        for var in 0..n {
            if boundary[var] == t {
                let from = plan.timelines[var][next_tok[var]].value;
                next_tok[var] += 1;
                let to = plan.timelines[var][next_tok[var]].value;
                boundary[var] += plan.timelines[var][next_tok[var]].duration;
                entries.push(StepEntry::Change { from, to });
            } else {
                entries.push(StepEntry::Unchanged);
            }
        }
        word.push(Symbol::Step(entries));
    }
    word
}

/// Number of letters in the alphabet for `vars` variables over `values`
/// distinct values: all initial symbols plus all step symbols.
pub fn alphabet_size(vars: usize, values: usize) -> u128 {
    let v = values as u128;
    v.pow(vars as u32) + (v * v + 1).pow(vars as u32)
}

/// All initial symbols whose started values lie in each variable's domain,
/// in canonical order (per-variable domain values by ascending id, last
/// variable varying fastest).
pub fn initial_symbols(p: &Problem) -> Vec<Symbol> {
    let mut domains: Vec<Vec<ValId>> = p
        .vars
        .iter()
        .map(|v| {
            let mut d = v.domain.clone();
            d.sort_unstable();
            d
        })
        .collect();
    if domains.iter().any(|d| d.is_empty()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; domains.len()];
    loop {
        out.push(Symbol::Initial(
            idx.iter().zip(&domains).map(|(&i, d)| d[i]).collect(),
        ));
        let mut var = domains.len();
        loop {
            if var == 0 {
                domains.clear();
                break;
            }
            var -= 1;
            idx[var] += 1;
            if idx[var] < domains[var].len() {
                break;
            }
            idx[var] = 0;
        }
        if domains.is_empty() {
            break;
        }
    }
    out
}

/// Every letter of the alphabet over the problem's variables and global
/// value table, in canonical order: initial symbols first, then step
/// symbols.  Step entries for each variable are ordered `Unchanged`, then
/// changes by ascending `(from, to)` over all global values, last variable
/// varying fastest.  Intended for exhaustive language comparisons, so this
/// includes symbols no valid word can use.
pub fn full_alphabet(p: &Problem) -> Vec<Symbol> {
    let nv = p.vars.len();
    let values = p.value_count();
    let mut out = Vec::new();

    let mut idx = vec![0usize; nv];
    if nv > 0 && values > 0 {
        loop {
            out.push(Symbol::Initial(idx.clone()));
            let mut var = nv;
            let mut done = true;
            while var > 0 {
                var -= 1;
                idx[var] += 1;
                if idx[var] < values {
                    done = false;
                    break;
                }
                idx[var] = 0;
            }
            if done {
                break;
            }
        }
    } else if nv == 0 {
        out.push(Symbol::Initial(Vec::new()));
    }

    let mut entries: Vec<StepEntry> = vec![StepEntry::Unchanged];
    for from in 0..values {
        for to in 0..values {
            entries.push(StepEntry::Change { from, to });
        }
    }
    let mut idx = vec![0usize; nv];
    loop {
        out.push(Symbol::Step(idx.iter().map(|&i| entries[i]).collect()));
        let mut var = nv;
        let mut done = true;
        while var > 0 {
            var -= 1;
            idx[var] += 1;
            if idx[var] < entries.len() {
                done = false;
                break;
            }
            idx[var] = 0;
        }
        if done {
            break;
        }
    }
    out
}

/// Renders a word in the line-oriented text form: one symbol per line,
/// space-separated per-variable entries in variable order.  `x:->v` starts
/// `v`, `x:u>v` switches from `u` to `v`, `x:.` keeps the token running.
pub fn render_symbol(p: &Problem, sym: &Symbol) -> String {
    let mut fields = Vec::new();
    match sym {
        Symbol::Initial(vals) => {
            for (var, &v) in vals.iter().enumerate() {
                fields.push(format!("{}:->{}", p.vars[var].name, p.value_name(v)));
            }
        }
        Symbol::Step(entries) => {
            for (var, e) in entries.iter().enumerate() {
                match e {
                    StepEntry::Unchanged => fields.push(format!("{}:.", p.vars[var].name)),
                    StepEntry::Change { from, to } => fields.push(format!(
                        "{}:{}>{}",
                        p.vars[var].name,
                        p.value_name(*from),
                        p.value_name(*to)
                    )),
                }
            }
        }
    }
    fields.join(" ")
}

pub fn render_word(p: &Problem, word: &[Symbol]) -> String {
    let mut out = String::new();
    for sym in word {
        out.push_str(&render_symbol(p, sym));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct WordParseError {
    pub line: usize,
    pub message: String,
}

/// Parses the text form produced by [`render_word`].  Entries must appear in
/// variable order; a line mixes initial and step entries in neither
/// direction.
pub fn parse_word(p: &Problem, text: &str) -> Result<Word, WordParseError> {
    let mut word = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != p.vars.len() {
            return Err(WordParseError {
                line,
                message: format!(
                    "expected {} entries, found {}",
                    p.vars.len(),
                    fields.len()
                ),
            });
        }
        let mut initial: Vec<ValId> = Vec::new();
        let mut steps: Vec<StepEntry> = Vec::new();
        for (var, field) in fields.iter().enumerate() {
            let (name, rest) = field.split_once(':').ok_or_else(|| WordParseError {
                line,
                message: format!("entry {field} is missing the variable prefix"),
            })?;
            if name != p.vars[var].name {
                return Err(WordParseError {
                    line,
                    message: format!(
                        "expected variable {} at position {}, found {}",
                        p.vars[var].name, var, name
                    ),
                });
            }
            let val = |s: &str| {
                p.value_id(s).ok_or_else(|| WordParseError {
                    line,
                    message: format!("unknown value {s}"),
                })
            };
            if rest == "." {
                steps.push(StepEntry::Unchanged);
            } else if let Some(v) = rest.strip_prefix("->") {
                initial.push(val(v)?);
            } else if let Some((u, v)) = rest.split_once('>') {
                steps.push(StepEntry::Change { from: val(u)?, to: val(v)? });
            } else {
                return Err(WordParseError {
                    line,
                    message: format!("cannot read entry {field}"),
                });
            }
        }
        match (initial.is_empty(), steps.is_empty()) {
            (false, true) => word.push(Symbol::Initial(initial)),
            (true, false) => word.push(Symbol::Step(steps)),
            (true, true) => {}
            (false, false) => {
                return Err(WordParseError {
                    line,
                    message: "line mixes initial and step entries".into(),
                })
            }
        }
    }
    Ok(word)
}
