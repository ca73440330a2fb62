use std::sync::Arc;

use super::{
    alpha_units, four_to_three, postprocess_ceiling, preprocess, preprocess_ceiling, quarter_len,
    Layout, Mode, PTree, SplitFamily,
};
use crate::error::{Result, SolveError};
use crate::game::SumQuery;
use crate::strategy::{capped, done, map_output, padded, then, BoxStrategy};

type Facts<F> = Vec<<F as SplitFamily>::Fact>;

/// Solves the preprocessed sum; at most `8α(n−1)` steps.
pub fn solve_preprocessed<F: SplitFamily>(
    fam: Arc<F>,
    tree: PTree<F::Instance>,
) -> Result<BoxStrategy<F::Query, Facts<F>>> {
    let PTree::Node { n, parts, leaf } = tree else { return Ok(done(Vec::new())) };
    let unit = alpha_units(&*fam);
    let t = quarter_len(n, unit);
    let [p0, p1, p2] = *parts;
    let subs = [
        padded(solve_preprocessed(fam.clone(), p0)?, t),
        padded(solve_preprocessed(fam.clone(), p1)?, t),
        padded(solve_preprocessed(fam.clone(), p2)?, t),
    ];
    let d = padded(preprocess(&fam, leaf, Mode::Simple)?, t);
    let combined = four_to_three(subs, d, t, Layout::Simple);
    let s = then(combined, move |([fa, fb, fc], (rest, fd)), _| {
        let mut facts = fa;
        facts.extend(fb);
        facts.extend(fc);
        facts.extend(fd);
        Ok(map_output(solve_preprocessed(fam, rest)?, move |more| {
            facts.extend(more);
            Ok(facts)
        }))
    });
    Ok(capped(s, postprocess_ceiling(n, unit), "preprocessed solution"))
}

/// Solves `A_n` for a simple family in at most `16αn − 15α` steps.
pub fn solve<F: SplitFamily>(
    fam: Arc<F>,
    inst: F::Instance,
) -> Result<BoxStrategy<F::Query, Facts<F>>> {
    let n = fam.size(&inst);
    let unit = alpha_units(&*fam);
    let pre = capped(preprocess(&fam, inst, Mode::Simple)?, preprocess_ceiling(n, unit), "preprocessing");
    Ok(then(pre, move |(tree, mut facts), _| {
        Ok(map_output(solve_preprocessed(fam, tree)?, move |more| {
            facts.extend(more);
            Ok(facts)
        }))
    }))
}

/// Length ceiling of [`solve`].
pub fn solve_ceiling(alpha_units: u64, n: usize) -> u64 {
    16 * alpha_units * n as u64 - 15 * alpha_units
}

/// Solves `B_n + 3·B_{n−1} + … + 3^n·B_0` in `3^{n+1}` steps.
///
/// `levels[i]` holds the `3^{n−i}` solutions of the `B_i` terms, each at most
/// `3^i` long; the `B_n` term must be simple. Outcomes come back in the same
/// shape.
pub fn stacked_solve<Q, S>(levels: Vec<Vec<BoxStrategy<Q, S>>>) -> Result<BoxStrategy<Q, Vec<Vec<S>>>>
where
    Q: SumQuery,
    S: Send + 'static,
{
    if levels.is_empty() {
        return Err(SolveError::ShapeError("no levels".into()));
    }
    let n = levels.len() - 1;
    for (i, l) in levels.iter().enumerate() {
        if l.len() != 3usize.pow((n - i) as u32) {
            return Err(SolveError::ShapeError(format!(
                "level {i} has {} terms, expected {}",
                l.len(),
                3usize.pow((n - i) as u32)
            )));
        }
    }
    let tagged: Vec<Vec<(usize, BoxStrategy<Q, S>)>> =
        levels.into_iter().map(|l| l.into_iter().enumerate().collect()).collect();
    let s = stack(tagged)?;
    let shape: Vec<usize> = (0..=n).map(|i| 3usize.pow((n - i) as u32)).collect();
    Ok(map_output(s, move |flat| {
        let mut out: Vec<Vec<Option<S>>> = shape.iter().map(|&k| (0..k).map(|_| None).collect()).collect();
        for (i, j, s) in flat {
            out[i][j] = Some(s);
        }
        Ok(out.into_iter().map(|l| l.into_iter().map(|s| s.expect("every term solved")).collect()).collect())
    }))
}

type Tagged<Q, S> = Vec<Vec<(usize, BoxStrategy<Q, S>)>>;

fn stack<Q: SumQuery, S: Send + 'static>(
    mut levels: Tagged<Q, S>,
) -> Result<BoxStrategy<Q, Vec<(usize, usize, S)>>> {
    let n = levels.len() - 1;
    let (j, top) = levels.pop().unwrap().pop().unwrap();
    if n == 0 {
        return Ok(map_output(top, move |s| Ok(vec![(0, j, s)])));
    }
    let t = 3u64.pow(n as u32);
    let mut groups: [Tagged<Q, S>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for lvl in levels {
        let k = lvl.len() / 3;
        let mut it = lvl.into_iter();
        for g in groups.iter_mut() {
            g.push(it.by_ref().take(k).collect());
        }
    }
    let [g0, g1, g2] = groups;
    let subs = [padded(stack(g0)?, t), padded(stack(g1)?, t), padded(stack(g2)?, t)];
    let d = padded(top, t);
    Ok(map_output(four_to_three(subs, d, t, Layout::Simple), move |([a, b, c], s)| {
        let mut v = vec![(n, j, s)];
        v.extend(a);
        v.extend(b);
        v.extend(c);
        Ok(v)
    }))
}
