//! Seeded random words, elements and spanning terms for checks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{product, SelfSimilarAction};
use crate::algebra::{Algebra, SpanningTerm};
use crate::alphabet::Word;
use crate::error::Result;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A uniform word of length `0..=max_len` over an alphabet of `size`.
    pub fn word(&mut self, size: usize, max_len: usize) -> Word {
        let len = self.rng.gen_range(0..=max_len);
        Word((0..len).map(|_| self.rng.gen_range(0..size)).collect())
    }

    /// Product of `1..=max_factors` generators and inverses.
    pub fn generator_product<A: SelfSimilarAction>(
        &mut self,
        action: &A,
        max_factors: usize,
    ) -> A::Element {
        let gens = action.generators();
        if gens.is_empty() {
            return action.identity();
        }
        let count = self.rng.gen_range(1..=max_factors.max(1));
        let factors: Vec<A::Element> = (0..count)
            .map(|_| {
                let g = &gens[self.rng.gen_range(0..gens.len())];
                if self.rng.gen_bool(0.5) {
                    action.invert(g)
                } else {
                    g.clone()
                }
            })
            .collect();
        product(action, &factors)
    }

    /// An element of `pool` or a product of at most `max_factors` generators,
    /// each with probability one half.
    pub fn element<A: SelfSimilarAction>(
        &mut self,
        action: &A,
        pool: &[A::Element],
        max_factors: usize,
    ) -> A::Element {
        if !pool.is_empty() && self.rng.gen_bool(0.5) {
            pool[self.rng.gen_range(0..pool.len())].clone()
        } else {
            self.generator_product(action, max_factors)
        }
    }

    /// A term `s_v u_g s_w*` with `|v|, |w| ≤ max_len` and `g` from
    /// [`Sampler::element`] with at most three factors.
    pub fn term<A: SelfSimilarAction>(
        &mut self,
        algebra: &Algebra<'_, A>,
        pool: &[A::Element],
        max_len: usize,
    ) -> Result<SpanningTerm<A::Element>> {
        let action = algebra.action();
        let size = action.alphabet().size();
        let v = self.word(size, max_len);
        let g = self.element(action, pool, 3);
        let w = self.word(size, max_len);
        algebra.term(v, &g, w)
    }

    /// A diagonal term `s_v u_g s_v*`.
    pub fn diagonal_term<A: SelfSimilarAction>(
        &mut self,
        algebra: &Algebra<'_, A>,
        pool: &[A::Element],
        max_len: usize,
    ) -> Result<SpanningTerm<A::Element>> {
        let mut t = self.term(algebra, pool, max_len)?;
        t.w = t.v.clone();
        Ok(t)
    }
}
