//! Differential suite: on small roses with positive automorphisms, the
//! candidate-set enumeration, the illegal-turn closure, and the INP set are
//! compared against brute-force oracles that share no code with the pipeline
//! beyond the raw morphism tables.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use traintrack::bounds::compute_bounds;
use traintrack::gos::{EdgePath, System};
use traintrack::inp::compute_inps;
use traintrack::turns::Turn;
use traintrack::vsets::enumerate_v;
use traintrack::{Caps, Session};

/// Oracle-side view of a rose map: plain image words over oriented letters
/// (letter ^ 1 is the inverse).
struct RoseMap {
    rank: usize,
    images: Vec<Vec<u32>>, // indexed by oriented letter
}

impl RoseMap {
    fn apply(&self, w: &[u32]) -> Vec<u32> {
        let mut out = Vec::new();
        for &x in w {
            out.extend_from_slice(&self.images[x as usize]);
        }
        out
    }

    fn reduce(w: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for &x in w {
            if out.last() == Some(&(x ^ 1)) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        out
    }

    /// Forward-iteration legality of the turn (p, q): illegal iff some
    /// iterated image turn is degenerate.
    fn turn_legal(&self, p: u32, q: u32) -> bool {
        let step = |(p, q): (u32, u32)| -> (u32, u32) {
            let lp = *self.images[p as usize].last().unwrap();
            let fq = self.images[q as usize][0];
            (lp, fq)
        };
        let mut seen = HashSet::new();
        let mut cur = (p, q);
        loop {
            if cur.1 == cur.0 ^ 1 {
                return false;
            }
            if !seen.insert(cur) {
                return true;
            }
            cur = step(cur);
        }
    }

    fn word_legal(&self, w: &[u32]) -> bool {
        w.windows(2).all(|p| self.turn_legal(p[0], p[1]))
    }

    /// Image lengths of all oriented letters at power t.
    fn lengths(&self, t: u32) -> Vec<u128> {
        let n = self.images.len();
        let mut lens: Vec<u128> = vec![1; n];
        for _ in 0..t {
            let prev = lens.clone();
            for e in 0..n {
                lens[e] = self.images[e].iter().map(|&x| prev[x as usize]).sum();
            }
        }
        lens
    }

    fn power_word(&self, w: &[u32], t: u32) -> Vec<u32> {
        let mut cur = w.to_vec();
        for _ in 0..t {
            cur = self.apply(&cur);
        }
        cur
    }
}

fn rose_letters(rank: usize) -> Vec<String> {
    (0..rank).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

fn to_system(map: &RoseMap) -> System {
    let names = rose_letters(map.rank);
    let edges: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let token = |x: u32| -> String {
        let c = (b'a' + (x / 2) as u8) as char;
        if x % 2 == 0 {
            c.to_string()
        } else {
            c.to_ascii_uppercase().to_string()
        }
    };
    let words: Vec<String> = (0..map.rank)
        .map(|i| {
            map.images[2 * i]
                .iter()
                .map(|&x| token(x))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let images: Vec<(&str, &str)> = names
        .iter()
        .zip(&words)
        .map(|(n, w)| (n.as_str(), w.as_str()))
        .collect();
    System::rose(&edges, &images).unwrap()
}

/// Random positive automorphisms via positive elementary moves x -> xy or
/// x -> yx; rejects maps with an image longer than `max_len`.
fn random_positive_automorphism(rng: &mut common::Rng, rank: usize, max_len: usize) -> Option<RoseMap> {
    let mut images: Vec<Vec<u32>> = (0..rank).map(|i| vec![2 * i as u32]).collect();
    let moves = 1 + rng.below(5);
    for _ in 0..moves {
        let x = rng.below(rank);
        let y = loop {
            let y = rng.below(rank);
            if y != x {
                break y;
            }
        };
        // Compose with x -> xy or x -> yx: post-compose on the image words.
        let right = rng.next() % 2 == 0;
        let mut w = images[x].clone();
        if right {
            w.extend_from_slice(&images[y].clone());
        } else {
            let mut v = images[y].clone();
            v.extend_from_slice(&w);
            w = v;
        }
        if w.len() > max_len {
            return None;
        }
        images[x] = w;
    }
    // Orient: store both orientations.
    let mut full = Vec::with_capacity(2 * rank);
    for img in &images {
        full.push(img.clone());
        full.push(img.iter().rev().map(|&x| x ^ 1).collect());
    }
    Some(RoseMap { rank, images: full })
}

/// All reduced words of length `len` over `2 * rank` letters.
fn words_of_len(rank: usize, len: usize) -> Vec<Vec<u32>> {
    let letters = 2 * rank as u32;
    let mut out: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            for x in 0..letters {
                if w.last() == Some(&(x ^ 1)) {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(x);
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

fn common_prefix_len(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

type PairKey = (Vec<u32>, Vec<u32>);

fn pair_key(w1: &[u32], w2: &[u32]) -> PairKey {
    let a = (w1.to_vec(), w2.to_vec());
    let b = (w2.to_vec(), w1.to_vec());
    if b < a {
        b
    } else {
        a
    }
}

/// Per-sample word cache: every legal reduced word up to a length, with its
/// image and the image length of everything but the last letter.
struct WordCache {
    words: Vec<Vec<u32>>,
    images: Vec<Vec<u32>>,
    p: Vec<usize>,
}

fn legal_word_cache(map: &RoseMap, all_words: &[Vec<u32>]) -> WordCache {
    let mut words = Vec::new();
    let mut images = Vec::new();
    let mut p = Vec::new();
    for w in all_words {
        if !map.word_legal(w) {
            continue;
        }
        let img = map.apply(w);
        debug_assert_eq!(RoseMap::reduce(&img), img, "legal words have reduced images");
        p.push(img.len() - map.images[*w.last().unwrap() as usize].len());
        words.push(w.clone());
        images.push(img);
    }
    WordCache { words, images, p }
}

/// Brute-force V(f) on a rose: all two-branch pairs with total length at
/// most `max_total`, checked directly against the definition.
fn oracle_v1(map: &RoseMap, cache: &WordCache, max_total: usize) -> BTreeSet<PairKey> {
    let _ = map;
    let mut out = BTreeSet::new();
    for (i, w1) in cache.words.iter().enumerate() {
        for (j, w2) in cache.words.iter().enumerate() {
            if j < i || w1.len() + w2.len() > max_total || w2[0] == w1[0] {
                continue;
            }
            let f1 = &cache.images[i];
            let f2 = &cache.images[j];
            if f1[0] != f2[0] {
                continue;
            }
            let l = common_prefix_len(f1, f2);
            if l > cache.p[i] && l > cache.p[j] {
                out.insert(pair_key(w1, w2));
            }
        }
    }
    out
}

/// Oracle constants mirroring the staged formulas, computed from the oracle
/// candidate set.
fn oracle_stage(map: &RoseMap, v1: &BTreeSet<PairKey>) -> u32 {
    let c = v1.iter().map(|(a, b)| a.len() + b.len()).max().unwrap_or(0) as u128;
    // t_exp and the min/max image lengths there.
    let n = map.images.len();
    let mut t_exp = 1u32;
    loop {
        let lens = map.lengths(t_exp);
        if lens.iter().all(|&l| l >= 2) {
            break;
        }
        t_exp += 1;
        assert!(t_exp < n as u32 + 2, "oracle map is not expanding");
    }
    let lens = map.lengths(t_exp);
    let lmin = *lens.iter().min().unwrap();
    let lmax = *lens.iter().max().unwrap();
    let mut geo = 0u128;
    let mut pow = 1u128;
    for _ in 0..t_exp {
        geo += pow;
        pow *= lmax;
    }
    let c_prime = c * geo;
    // t1: minimal with every length strictly above c_prime / (lmin - 1).
    let mut t1 = 1u32;
    loop {
        let lens = map.lengths(t1);
        if lens.iter().all(|&l| l * (lmin - 1) > c_prime) {
            break;
        }
        t1 += 1;
        assert!(t1 < 40, "oracle stage search ran away");
    }
    t1
}

/// Brute-force INP prolongations: iterate every one-illegal-turn candidate
/// with total length at most `max_total` through the direct core map and
/// collect the periodic prolongations.
fn oracle_inps(map: &RoseMap, cache: &WordCache, max_total: usize, stage: u32) -> BTreeSet<PairKey> {
    let stage_lens = map.lengths(stage);
    let core = |w1: &[u32], w2: &[u32]| -> Option<(Vec<u32>, Vec<u32>)> {
        // Reduced image of rev(w1) . w2, then the stage-level pullback.
        let mut path: Vec<u32> = w1.iter().rev().map(|&x| x ^ 1).collect();
        path.extend_from_slice(w2);
        let img = RoseMap::reduce(&map.apply(&path));
        if img.is_empty() {
            return None;
        }
        let bad: Vec<usize> = (0..img.len() - 1)
            .filter(|&i| !map.turn_legal(img[i], img[i + 1]))
            .collect();
        if bad.is_empty() {
            return None;
        }
        assert_eq!(bad.len(), 1, "single illegal turn is preserved");
        let j = bad[0];
        let b1: Vec<u32> = img[..=j].iter().rev().map(|&x| x ^ 1).collect();
        let b2: Vec<u32> = img[j + 1..].to_vec();
        let a = map.power_word(&b1, stage);
        let b = map.power_word(&b2, stage);
        let l = common_prefix_len(&a, &b);
        let pull = |branch: &[u32], l: usize| -> usize {
            if l == 0 {
                return 1;
            }
            let mut acc = 0u128;
            for (k, &e) in branch.iter().enumerate() {
                acc += stage_lens[e as usize];
                if (l as u128) <= acc {
                    return k + 1;
                }
            }
            branch.len()
        };
        let j1 = pull(&b1, l);
        let j2 = pull(&b2, l);
        Some((b1[..j1].to_vec(), b2[..j2].to_vec()))
    };
    let mut found = BTreeSet::new();
    for w1 in &cache.words {
        for w2 in &cache.words {
            if w1.len() + w2.len() > max_total
                || w2[0] == w1[0]
                || map.turn_legal(w1[0] ^ 1, w2[0])
            {
                continue;
            }
            // Orbit of the core map.
            let mut seen: Vec<PairKey> = Vec::new();
            let mut cur = (w1.clone(), w2.clone());
            for _ in 0..60 {
                let key = pair_key(&cur.0, &cur.1);
                if let Some(pos) = seen.iter().position(|k| *k == key) {
                    for k in &seen[pos..] {
                        found.insert(k.clone());
                    }
                    break;
                }
                seen.push(key);
                match core(&cur.0, &cur.1) {
                    Some(next) => cur = next,
                    None => break,
                }
            }
        }
    }
    found
}

fn entry_keys(_sys: &System, entries: &[traintrack::vsets::VEntry]) -> BTreeSet<PairKey> {
    let word = |p: &EdgePath| -> Vec<u32> { p.edges.iter().map(|e| e.0).collect() };
    entries
        .iter()
        .map(|e| pair_key(&word(&e.branch1), &word(&e.branch2)))
        .collect()
}

#[test]
fn criterion_08_oracle_differential() {
    let start = std::time::Instant::now();
    let mut rng = common::Rng(0x0acc1e);
    // Word universes per rank (lengths 1..=7), shared across samples.
    let word_universe: Vec<Vec<Vec<u32>>> = (2..=3)
        .map(|rank| {
            let mut all = Vec::new();
            for l in 1..=7 {
                all.extend(words_of_len(rank, l));
            }
            all
        })
        .collect();
    let mut samples = 0usize;
    let mut seen_maps: HashSet<Vec<Vec<u32>>> = HashSet::new();
    let mut attempts = 0usize;
    while samples < 100 && attempts < 5000 {
        attempts += 1;
        let rank = 2 + rng.below(2);
        let map = match random_positive_automorphism(&mut rng, rank, 4) {
            Some(m) => m,
            None => continue,
        };
        if !seen_maps.insert(map.images.clone()) {
            continue;
        }
        let sys = to_system(&map);
        let sess = Session::new(&sys, Caps::default()).unwrap();
        if !sess.profile.is_expanding() {
            continue;
        }
        assert!(sess.profile.is_train_track, "positive maps are train track");
        samples += 1;

        // (a) Illegal set vs forward iteration, over all trivial turns.
        let g = &sys.graph;
        for p in g.oriented_tops() {
            for q in g.oriented_tops() {
                let t = Turn::trivial(g, p, q).unwrap();
                let oracle_illegal = !map.turn_legal(p.0, q.0);
                assert_eq!(
                    !sess.profile.closure.is_legal(&t),
                    oracle_illegal,
                    "legality mismatch on sample {samples}"
                );
            }
        }

        // (b) V(f) vs brute force over the length-8 universe.
        let all_words = &word_universe[map.rank - 2];
        let cache = legal_word_cache(&map, all_words);
        let v1 = enumerate_v(&sess, 1).unwrap();
        let max_entry = v1.iter().map(|e| e.len()).max().unwrap_or(0);
        assert!(
            max_entry <= 8,
            "sample {samples} has a V(f) entry of length {max_entry} beyond the oracle universe"
        );
        let got = entry_keys(&sys, &v1);
        let want = oracle_v1(&map, &cache, 8);
        assert_eq!(got, want, "V(f) mismatch on sample {samples}");

        // (c) INP set vs brute-force orbit search from short candidates.
        let bounds = compute_bounds(&sess).unwrap();
        let inps = compute_inps(&sess, &bounds).unwrap();
        for r in &inps.records {
            assert!(r.verified, "unverified record on sample {samples}");
        }
        let stage = oracle_stage(&map, &want);
        let oracle = oracle_inps(&map, &cache, 6, stage);
        let word = |p: &EdgePath| -> Vec<u32> { p.edges.iter().map(|e| e.0).collect() };
        let pipeline: BTreeSet<PairKey> = inps
            .records
            .iter()
            .map(|r| {
                let e = &inps.entries[r.entry_index];
                pair_key(&word(&e.branch1), &word(&e.branch2))
            })
            .collect();
        let pipeline_short: BTreeSet<PairKey> = pipeline
            .iter()
            .filter(|(a, b)| a.len() + b.len() <= 6)
            .cloned()
            .collect();
        assert_eq!(
            pipeline_short, oracle,
            "INP mismatch on sample {samples} (images {:?})",
            map.images
        );
        assert!(
            oracle.is_subset(&pipeline),
            "oracle found INPs the pipeline missed on sample {samples}"
        );
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = samples >= 100 && secs < 300.0;
    println!(
        "ACCEPTANCE 08: {} - {samples} rose samples agreed with the brute-force oracles in {secs:.1}s",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{samples} samples in {secs:.1}s");
}
