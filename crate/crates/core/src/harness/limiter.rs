use std::time::Duration;

use super::clock::Clock;
use crate::error::{Error, Result};

/// Token bucket refilled at `rate` units per second up to `capacity`.
///
/// The bucket starts empty, so over any run of length `T` starting at
/// creation at most `rate * T` units pass; after an idle period a burst of at
/// most `capacity` is allowed. A request larger than the capacity waits for a
/// full bucket and then leaves it in debt.
#[derive(Debug, Clone)]
pub struct TokenBucket {
    rate: f64,
    capacity: f64,
    tokens: f64,
    last: Duration,
}

impl TokenBucket {
    /// Bucket holding one second of budget.
    pub fn per_second(rate: f64, start: Duration) -> Result<Self> {
        Self::new(rate, rate, start)
    }

    pub fn new(rate: f64, capacity: f64, start: Duration) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::param(format!("target rate {rate} must be > 0")));
        }
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(Error::param(format!("bucket capacity {capacity} must be > 0")));
        }
        Ok(Self {
            rate,
            capacity,
            tokens: 0.0,
            last: start,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn refill(&mut self, now: Duration) {
        if now > self.last {
            let dt = (now - self.last).as_secs_f64();
            self.tokens = (self.tokens + dt * self.rate).min(self.capacity);
            self.last = now;
        }
    }

    /// Blocks on `clock` until `amount` units may pass, then takes them.
    pub fn acquire(&mut self, amount: f64, clock: &impl Clock) {
        let need = amount.min(self.capacity);
        self.refill(clock.now());
        while self.tokens < need {
            let wait = ((need - self.tokens) / self.rate).max(1e-9);
            clock.sleep(Duration::from_secs_f64(wait));
            self.refill(clock.now());
        }
        self.tokens -= amount;
    }
}

/// A token bucket paired with the clock it sleeps on.
pub struct Throttle<C: Clock> {
    bucket: TokenBucket,
    clock: C,
}

impl<C: Clock> Throttle<C> {
    /// Throttle at `rate` units per second with one second of burst.
    pub fn new(rate: f64, clock: C) -> Result<Self> {
        let bucket = TokenBucket::per_second(rate, clock.now())?;
        Ok(Self { bucket, clock })
    }

    pub fn acquire(&mut self, amount: u64) {
        self.bucket.acquire(amount as f64, &self.clock);
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }
}

/// Iterator adapter pacing items by their weight (e.g. bytes). Items are
/// never dropped or reordered.
pub struct RateLimited<I, C: Clock, F> {
    inner: I,
    throttle: Throttle<C>,
    weight: F,
}

/// Paces `records` to at most `target_rate` weight units per second.
pub fn rate_limit<I, C, F>(records: I, target_rate: f64, clock: C, weight: F) -> Result<RateLimited<I::IntoIter, C, F>>
where
    I: IntoIterator,
    C: Clock,
    F: FnMut(&I::Item) -> u64,
{
    Ok(RateLimited {
        inner: records.into_iter(),
        throttle: Throttle::new(target_rate, clock)?,
        weight,
    })
}

impl<I, C, F> Iterator for RateLimited<I, C, F>
where
    I: Iterator,
    C: Clock,
    F: FnMut(&I::Item) -> u64,
{
    type Item = I::Item;

    fn next(&mut self) -> Option<I::Item> {
        let item = self.inner.next()?;
        let w = (self.weight)(&item);
        self.throttle.acquire(w);
        Some(item)
    }
}
