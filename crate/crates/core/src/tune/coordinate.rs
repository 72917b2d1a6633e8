use super::search::{ProposalContext, Proposer};
use crate::blueprint::ParamPath;

/// Deterministic coordinate search: cycles through the parameters, trying
/// one step up and, if that does not improve the best candidate, one step
/// down. Stops after a full cycle without improvement.
#[derive(Debug, Clone, Default)]
pub struct CoordinateProposer {
    param: usize,
    up: bool,
    /// Direction tried last, if a proposal is outstanding.
    pending: Option<bool>,
    tried_other: bool,
    idle: usize,
}

impl CoordinateProposer {
    pub fn new() -> Self {
        CoordinateProposer {
            up: true,
            ..Default::default()
        }
    }

    fn advance(&mut self, n: usize) {
        self.param = (self.param + 1) % n;
        self.up = true;
        self.tried_other = false;
        self.idle += 1;
    }
}

impl Proposer for CoordinateProposer {
    fn name(&self) -> &str {
        "coordinate search"
    }

    fn propose(
        &mut self,
        ctx: &ProposalContext<'_>,
    ) -> Result<Option<Vec<(ParamPath, f64)>>, String> {
        let n = ctx.params.len();
        if n == 0 {
            return Ok(None);
        }
        if self.pending.take().is_some() {
            if ctx.improved() {
                self.advance(n);
                self.idle = 0;
            } else if !self.tried_other {
                self.up = !self.up;
                self.tried_other = true;
            } else {
                self.advance(n);
            }
        }
        // Skip steps that the bounds turn into no-ops.
        let mut guard = 0;
        loop {
            if self.idle >= n || guard > 2 * n {
                return Ok(None);
            }
            let p = &ctx.params[self.param];
            let current = ctx
                .best
                .get_param(&p.path)
                .ok_or_else(|| format!("{} is missing", p.path))?;
            let next = p.step(current, self.up);
            if next != current {
                self.pending = Some(self.up);
                return Ok(Some(vec![(p.path.clone(), next)]));
            }
            guard += 1;
            if !self.tried_other {
                self.up = !self.up;
                self.tried_other = true;
            } else {
                self.advance(n);
            }
        }
    }
}
