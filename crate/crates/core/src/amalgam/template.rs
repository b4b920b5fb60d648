//! Extension templates for the relation-only predimension: a finite
//! extension `ext ⊇ base` of points `0..ext_size`, the base being `0..base_size`.

use std::collections::BTreeSet;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::structures::{PreStructure, Triple};

/// An isomorphism type of an extension over a base, in base-fixing canonical
/// form: among all relabelings of the new points, the one whose sorted
/// triple list is lexicographically least.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtensionTemplate {
    base_size: usize,
    ext_size: usize,
    triples: Vec<Triple>,
    rel_delta: i64,
}

/// Upper bound on the points of a template.
pub const MAX_TEMPLATE_POINTS: usize = 8;

pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

fn relabel(triples: &[Triple], map: &[usize]) -> Vec<Triple> {
    let mut v: Vec<Triple> = triples.iter().map(|t| t.map(|x| map[x])).collect();
    v.sort_unstable();
    v
}

/// Least relabeling of `triples` over all permutations of the base points
/// (when `setwise`) and of the new points.
pub(crate) fn canonical_triples(base: usize, ext: usize, triples: &[Triple], setwise: bool) -> Vec<Triple> {
    let new_perms = permutations(ext - base);
    let base_perms = if setwise { permutations(base) } else { vec![(0..base).collect()] };
    let mut best: Option<Vec<Triple>> = None;
    let mut map = vec![0; ext];
    for bp in &base_perms {
        for (i, &p) in bp.iter().enumerate() {
            map[i] = p;
        }
        for np in &new_perms {
            for (i, &p) in np.iter().enumerate() {
                map[base + i] = base + p;
            }
            let cand = relabel(triples, &map);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

pub(crate) fn encode(base: usize, ext: usize, triples: &[Triple]) -> String {
    let body: Vec<String> = triples.iter().map(|t| format!("{},{},{}", t[0], t[1], t[2])).collect();
    format!("{base}+{}:{}", ext - base, body.join(";"))
}

/// First 16 hex digits of the SHA-256 of `code`.
pub fn code_hash(code: &str) -> String {
    Sha256::digest(code.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `|Y| − #triples inside Y` for a bitmask `y` over template points.
pub(crate) fn delta_mask(y: u64, masks: &[u64]) -> i64 {
    y.count_ones() as i64 - masks.iter().filter(|&&m| m & !y == 0).count() as i64
}

pub(crate) fn masks_of(triples: &[Triple]) -> Vec<u64> {
    triples.iter().map(|t| t.iter().fold(0u64, |m, &i| m | 1 << i)).collect()
}

/// GS for the whole extension and strongness of the base in it.
fn admissible(base: usize, ext: usize, masks: &[u64]) -> bool {
    let base_mask = (1u64 << base) - 1;
    let db = delta_mask(base_mask, masks);
    (0u64..1 << ext).all(|y| {
        let d = delta_mask(y, masks);
        d >= 0 && (y & base_mask != base_mask || d >= db)
    })
}

fn letter(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("x{i}")
    }
}

impl ExtensionTemplate {
    /// Validates indices and brings the template into base-fixing canonical form.
    pub fn new(base_size: usize, ext_size: usize, triples: impl IntoIterator<Item = Triple>) -> Result<Self> {
        if base_size > ext_size || ext_size > MAX_TEMPLATE_POINTS {
            return Err(Error::Domain(format!(
                "template sizes {base_size} ⊆ {ext_size} out of range (at most {MAX_TEMPLATE_POINTS} points)"
            )));
        }
        let set: BTreeSet<Triple> = triples.into_iter().collect();
        if set.iter().flatten().any(|&i| i >= ext_size) {
            return Err(Error::Domain("template triple outside the extension".into()));
        }
        let triples: Vec<Triple> = set.into_iter().collect();
        let masks = masks_of(&triples);
        let rel_delta = delta_mask((1u64 << ext_size) - 1, &masks) - delta_mask((1u64 << base_size) - 1, &masks);
        Ok(ExtensionTemplate {
            base_size,
            ext_size,
            triples: canonical_triples(base_size, ext_size, &triples, false),
            rel_delta,
        })
    }

    /// Parses a code such as `2+1:0,1,2` (base size, new points, triples).
    pub fn from_code(code: &str) -> Result<Self> {
        let bad = || Error::input("template", format!("malformed template code '{code}'"));
        let (sizes, body) = code.split_once(':').ok_or_else(bad)?;
        let (b, k) = sizes.split_once('+').ok_or_else(bad)?;
        let b: usize = b.parse().map_err(|_| bad())?;
        let k: usize = k.parse().map_err(|_| bad())?;
        let mut triples = Vec::new();
        for part in body.split(';').filter(|s| !s.is_empty()) {
            let v: Vec<usize> = part
                .split(',')
                .map(|x| x.parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let t: Triple = v.try_into().map_err(|_| bad())?;
            triples.push(t);
        }
        Self::new(b, b + k, triples)
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn ext_size(&self) -> usize {
        self.ext_size
    }

    pub fn new_points(&self) -> usize {
        self.ext_size - self.base_size
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn rel_delta(&self) -> i64 {
        self.rel_delta
    }

    /// Triples inside the base.
    pub fn base_triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter().filter(move |t| t.iter().all(|&x| x < self.base_size))
    }

    /// Base-fixing canonical code.
    pub fn code(&self) -> String {
        encode(self.base_size, self.ext_size, &self.triples)
    }

    /// Canonical code up to isomorphisms that move the base setwise; the
    /// template id used for enumeration and μ bounds.
    pub fn id(&self) -> String {
        encode(
            self.base_size,
            self.ext_size,
            &canonical_triples(self.base_size, self.ext_size, &self.triples, true),
        )
    }

    pub fn hash(&self) -> String {
        code_hash(&self.id())
    }

    /// GS for the extension and strongness of the base in it.
    pub fn is_admissible(&self) -> bool {
        admissible(self.base_size, self.ext_size, &masks_of(&self.triples))
    }

    /// Relative δ of every proper intermediate `base ⊊ Y ⊊ ext` is positive
    /// and `rel_delta = 0`.
    pub fn is_zero_minimal(&self) -> bool {
        if self.rel_delta != 0 || self.ext_size == self.base_size {
            return false;
        }
        let masks = masks_of(&self.triples);
        let base_mask = (1u64 << self.base_size) - 1;
        let full = (1u64 << self.ext_size) - 1;
        let db = delta_mask(base_mask, &masks);
        let new = full & !base_mask;
        let mut s = (new - 1) & new;
        while s != 0 {
            if delta_mask(base_mask | s, &masks) - db <= 0 {
                return false;
            }
            s = (s - 1) & new;
        }
        true
    }

    pub fn ext(&self) -> PreStructure {
        PreStructure::from_parts(
            (0..self.ext_size).map(letter).collect(),
            self.triples.iter().copied().collect(),
        )
    }

    pub fn base(&self) -> PreStructure {
        PreStructure::from_parts(
            (0..self.base_size).map(letter).collect(),
            self.base_triples().copied().collect(),
        )
    }
}

impl fmt::Display for ExtensionTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

fn all_triples(ext: usize, base: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for a in 0..ext {
        for b in 0..ext {
            for c in 0..ext {
                if a >= base || b >= base || c >= base {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn choose_up_to(n: usize, k: usize) -> u128 {
    (0..=k).map(|t| binom(n, t)).sum()
}

/// Extends `fixed` by sets of at most `max_new` triples from `pool`,
/// keeping those for which `keep` holds; `keep` must be anti-monotone in
/// the added set so failing branches are pruned.
fn extensions(
    fixed: &[Triple],
    pool: &[Triple],
    max_new: usize,
    keep: &dyn Fn(&[u64]) -> bool,
    out: &mut dyn FnMut(&[Triple]),
) {
    fn go(
        cur: &mut Vec<Triple>,
        masks: &mut Vec<u64>,
        pool: &[Triple],
        start: usize,
        left: usize,
        keep: &dyn Fn(&[u64]) -> bool,
        out: &mut dyn FnMut(&[Triple]),
    ) {
        out(cur);
        if left == 0 {
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            masks.push(pool[i].iter().fold(0u64, |m, &x| m | 1 << x));
            if keep(masks) {
                go(cur, masks, pool, i + 1, left - 1, keep, out);
            }
            cur.pop();
            masks.pop();
        }
    }
    let mut cur = fixed.to_vec();
    let mut masks = masks_of(fixed);
    if keep(&masks) {
        go(&mut cur, &mut masks, pool, 0, max_new, keep, out);
    }
}

/// All relation-only structures on `n` points with `|Y| ≥ #triples(Y)`
/// everywhere, up to isomorphism, in canonical order.
pub(crate) fn gs_structures(n: usize, budget: &Budget) -> Result<Vec<Vec<Triple>>> {
    let pool = all_triples(n, 0);
    budget.check_subsets("template bases", choose_up_to(pool.len(), n))?;
    let full = (1u64 << n) - 1;
    let gs = move |m: &[u64]| (0..=full).all(|y| delta_mask(y, m) >= 0);
    let mut seen = BTreeSet::new();
    extensions(&[], &pool, n, &gs, &mut |t| {
        seen.insert(canonical_triples(0, n, t, false));
    });
    Ok(seen.into_iter().collect())
}

/// Every template over the fixed base `base_triples` on points `0..base`
/// with `ext_size` points in total and rel_delta in `[lo, hi]`, admissible
/// (GS, base strong), in base-fixing canonical form, sorted by code.
pub fn templates_over(
    base: usize,
    base_triples: &[Triple],
    ext_size: usize,
    (lo, hi): (i64, i64),
    budget: &Budget,
) -> Result<Vec<ExtensionTemplate>> {
    if ext_size > MAX_TEMPLATE_POINTS || ext_size < base {
        return Err(Error::Domain(format!("extension size {ext_size} out of range")));
    }
    let k = ext_size - base;
    let lo = lo.max(0);
    if hi < lo || (k as i64) < lo {
        return Ok(Vec::new());
    }
    // rel_delta = k − #new triples
    let max_new = (k as i64 - lo) as usize;
    let pool = all_triples(ext_size, base);
    budget.check_subsets("template extensions", choose_up_to(pool.len(), max_new))?;
    let base_mask = (1u64 << base) - 1;
    let full = (1u64 << ext_size) - 1;
    let base_masks = masks_of(base_triples);
    let db = delta_mask(base_mask, &base_masks);
    let keep = move |m: &[u64]| {
        (0..=full).all(|y| {
            let d = delta_mask(y, m);
            d >= 0 && (y & base_mask != base_mask || d >= db)
        })
    };
    let mut seen = BTreeSet::new();
    extensions(base_triples, &pool, max_new, &keep, &mut |t| {
        let rel = k as i64 - (t.len() - base_triples.len()) as i64;
        if rel >= lo && rel <= hi {
            seen.insert(ExtensionTemplate::new(base, ext_size, t.iter().copied()).expect("valid sizes"));
        }
    });
    let mut v: Vec<ExtensionTemplate> = seen.into_iter().collect();
    v.sort_by_key(ExtensionTemplate::code);
    Ok(v)
}

/// All templates with the given sizes and rel_delta in range, up to
/// isomorphisms moving the base setwise, sorted by id. Each template is
/// returned in the relabeling that realizes its id.
pub fn enumerate_templates(
    base_size: usize,
    ext_size: usize,
    range: (i64, i64),
    budget: &Budget,
) -> Result<Vec<ExtensionTemplate>> {
    if ext_size > MAX_TEMPLATE_POINTS || ext_size < base_size {
        return Err(Error::Domain(format!(
            "sizes {base_size} ⊆ {ext_size} out of range (at most {MAX_TEMPLATE_POINTS} points)"
        )));
    }
    let mut out = std::collections::BTreeMap::new();
    for base in gs_structures(base_size, budget)? {
        for t in templates_over(base_size, &base, ext_size, range, budget)? {
            budget.check_time()?;
            let id = t.id();
            out.entry(id.clone()).or_insert_with(|| {
                ExtensionTemplate::from_code(&id).expect("ids parse")
            });
        }
    }
    Ok(out.into_values().collect())
}
