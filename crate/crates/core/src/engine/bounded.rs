use std::sync::Arc;

use super::{
    four_to_three, postprocess_ceiling, preprocess, preprocess_ceiling, quarter_len, Layout, Mode,
    PTree, SplitFamily,
};
use crate::error::Result;
use crate::game::SumQuery;
use crate::schedule::{pad_to_r, Schedule};
use crate::strategy::{capped, done, map_output, padded, then, BoxStrategy};

type Facts<F> = Vec<<F as SplitFamily>::Fact>;

/// Per-unit length of the scheduled solution, `⌈4α⌉`.
pub fn beta_units(alpha: f64) -> u64 {
    (4.0 * alpha).ceil().max(1.0) as u64
}

/// Length ceiling of [`solve_bounded`].
pub fn bounded_ceiling(alpha: f64, n: usize) -> u64 {
    let b = beta_units(alpha);
    16 * b * n as u64 - 15 * b
}

/// Makes a weighted reduction conform to `r(t)` of the schedule.
pub fn to_r_reduction<Q: SumQuery, O: Send + 'static>(
    s: BoxStrategy<Q, O>,
    schedule: Schedule,
) -> BoxStrategy<Q, O> {
    pad_to_r(s, schedule)
}

/// Solves the preprocessed sum predictably under `schedule`.
pub fn solve_preprocessed_bounded<F: SplitFamily>(
    fam: Arc<F>,
    tree: PTree<F::Instance>,
    schedule: Schedule,
) -> Result<BoxStrategy<F::Query, Facts<F>>> {
    let PTree::Node { n, parts, leaf } = tree else { return Ok(done(Vec::new())) };
    let unit = beta_units(fam.alpha());
    let t = quarter_len(n, unit);
    let [sa, sb, sc] = schedule.interlace();
    let [p0, p1, p2] = *parts;
    let subs = [
        padded(solve_preprocessed_bounded(fam.clone(), p0, sa)?, t),
        padded(solve_preprocessed_bounded(fam.clone(), p1, sb)?, t),
        padded(solve_preprocessed_bounded(fam.clone(), p2, sc)?, t),
    ];
    let d = padded(pad_to_r(preprocess(&fam, leaf, Mode::Weighted)?, schedule.clone()), t);
    let rest_schedule = schedule.shift(t + 2);
    let combined = four_to_three(subs, d, t, Layout::Scheduled(schedule));
    let s = then(combined, move |([fa, fb, fc], (rest, fd)), _| {
        let mut facts = fa;
        facts.extend(fb);
        facts.extend(fc);
        facts.extend(fd);
        Ok(map_output(solve_preprocessed_bounded(fam, rest, rest_schedule)?, move |more| {
            facts.extend(more);
            Ok(facts)
        }))
    });
    Ok(capped(s, postprocess_ceiling(n, unit), "preprocessed solution"))
}

/// Solves `A_n` for a bounded family in at most `16βn − 15β` steps, `β = ⌈4α⌉`.
pub fn solve_bounded<F: SplitFamily>(
    fam: Arc<F>,
    inst: F::Instance,
    schedule: Schedule,
) -> Result<BoxStrategy<F::Query, Facts<F>>> {
    let n = fam.size(&inst);
    let unit = beta_units(fam.alpha());
    let pre = pad_to_r(preprocess(&fam, inst, Mode::Weighted)?, schedule.clone());
    let pre = capped(pre, preprocess_ceiling(n, unit), "preprocessing");
    Ok(then(pre, move |(tree, mut facts), steps| {
        Ok(map_output(solve_preprocessed_bounded(fam, tree, schedule.shift(steps))?, move |more| {
            facts.extend(more);
            Ok(facts)
        }))
    }))
}
