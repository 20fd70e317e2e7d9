use super::RunnerError;
use crate::llm::{collect_samples, ChatRequest, LlmError, SampleBatch, SampleOptions, Transport};
use crate::prompting::PromptSpec;
use crate::stats::{build_reports, ComparisonReport, StatsError, TestKind, VariabilityReport};

/// Shifts batch iteration indices, so a second batch over the same
/// fixture directory reads the fixtures after the first batch's.
pub struct OffsetTransport<'a> {
    pub inner: &'a dyn Transport,
    pub offset: usize,
}

impl Transport for OffsetTransport<'_> {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        self.inner.send(request)
    }

    fn send_at(&self, iteration: usize, request: &ChatRequest) -> Result<String, LlmError> {
        self.inner.send_at(self.offset + iteration, request)
    }
}

fn stats_error(e: StatsError) -> RunnerError {
    match e {
        StatsError::InsufficientSamples { batch, got } => RunnerError::InsufficientSamples { batch, got },
        other => RunnerError::Stats(other),
    }
}

fn check_n(n: usize) -> Result<(), RunnerError> {
    if n < 2 {
        return Err(RunnerError::InsufficientSamples {
            batch: "request".into(),
            got: n,
        });
    }
    Ok(())
}

/// Variability of `n` fresh answers to one use-case prompt.
pub fn run_rq1(
    spec: &PromptSpec,
    n: usize,
    transport: &dyn Transport,
    options: &SampleOptions,
) -> Result<(SampleBatch, VariabilityReport), RunnerError> {
    check_n(n)?;
    let batch = collect_samples(transport, spec, n, options)?;
    let reports = build_reports(&batch, None, TestKind::Anova).map_err(stats_error)?;
    Ok((batch, reports.variability))
}

/// Cross-use-case comparison: batch A takes iterations `0..n`, batch B
/// `n..2n` of the transport.
pub fn run_rq2(
    spec_a: &PromptSpec,
    spec_b: &PromptSpec,
    n: usize,
    transport: &dyn Transport,
    test: TestKind,
    options: &SampleOptions,
) -> Result<(SampleBatch, SampleBatch, ComparisonReport), RunnerError> {
    check_n(n)?;
    let batch_a = collect_samples(transport, spec_a, n, options)?;
    let shifted = OffsetTransport {
        inner: transport,
        offset: n,
    };
    let batch_b = collect_samples(&shifted, spec_b, n, options)?;
    let reports = build_reports(&batch_a, Some(&batch_b), test).map_err(stats_error)?;
    let comparison = reports.comparison.expect("two batches give a comparison");
    Ok((batch_a, batch_b, comparison))
}
