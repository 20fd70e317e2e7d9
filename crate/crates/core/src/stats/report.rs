use super::{anova_one_way, dispersion, jaccard, kruskal_wallis, StatsError};
use crate::config::{Attribute, HyperparameterConfig};
use crate::llm::SampleBatch;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Anova,
    Kruskal,
    Both,
}

impl TestKind {
    fn anova(self) -> bool {
        matches!(self, TestKind::Anova | TestKind::Both)
    }

    fn kruskal(self) -> bool {
        matches!(self, TestKind::Kruskal | TestKind::Both)
    }
}

impl FromStr for TestKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "anova" => Ok(TestKind::Anova),
            "kruskal" => Ok(TestKind::Kruskal),
            "both" => Ok(TestKind::Both),
            other => Err(format!("unknown test `{other}` (expected anova, kruskal or both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeVariability {
    pub attribute: String,
    pub n: usize,
    pub std: f64,
    pub variance: f64,
    pub iqr: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariabilityReport {
    pub samples: usize,
    pub parsed: usize,
    pub failures: usize,
    pub attributes: Vec<AttributeVariability>,
}

impl VariabilityReport {
    pub fn attribute(&self, attr: Attribute) -> &AttributeVariability {
        &self.attributes[attr as usize]
    }

    /// `attribute,statistic,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attribute,statistic,value\n");
        for a in &self.attributes {
            for (stat, value) in [
                ("n", a.n as f64),
                ("std", a.std),
                ("variance", a.variance),
                ("iqr", a.iqr),
                ("failures", a.failures as f64),
            ] {
                writeln!(out, "{},{stat},{value}", a.attribute).expect("string write");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaSummary {
    /// `None` together with `f_infinite` when the statistic is unbounded.
    pub f_stat: Option<f64>,
    pub f_infinite: bool,
    pub p_value: f64,
    pub df_between: usize,
    pub df_within: usize,
    /// Every observation identical: reported as F = 0, p = 1.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KruskalSummary {
    pub h_stat: f64,
    pub p_value: f64,
    pub df: usize,
    /// Every observation tied: reported as H = 0, p = 1.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeComparison {
    pub attribute: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anova: Option<AnovaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kruskal: Option<KruskalSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub test: TestKind,
    pub attributes: Vec<AttributeComparison>,
    /// Over the sets of distinct full configurations.
    pub config_jaccard: f64,
    /// Over lower-cased whitespace tokens of the two rendered prompts.
    pub prompt_jaccard: Option<f64>,
}

impl ComparisonReport {
    pub fn attribute(&self, attr: Attribute) -> &AttributeComparison {
        &self.attributes[attr as usize]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("attribute,statistic,value\n");
        for a in &self.attributes {
            if let Some(r) = &a.anova {
                let f = r.f_stat.map_or_else(|| "inf".to_owned(), |f| f.to_string());
                writeln!(out, "{},anova_f,{f}", a.attribute).expect("string write");
                writeln!(out, "{},anova_p,{}", a.attribute, r.p_value).expect("string write");
                writeln!(out, "{},anova_df_between,{}", a.attribute, r.df_between).expect("string write");
                writeln!(out, "{},anova_df_within,{}", a.attribute, r.df_within).expect("string write");
            }
            if let Some(r) = &a.kruskal {
                writeln!(out, "{},kruskal_h,{}", a.attribute, r.h_stat).expect("string write");
                writeln!(out, "{},kruskal_p,{}", a.attribute, r.p_value).expect("string write");
                writeln!(out, "{},kruskal_df,{}", a.attribute, r.df).expect("string write");
            }
        }
        writeln!(out, "*,config_jaccard,{}", self.config_jaccard).expect("string write");
        if let Some(j) = self.prompt_jaccard {
            writeln!(out, "*,prompt_jaccard,{j}").expect("string write");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reports {
    pub variability: VariabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variability_b: Option<VariabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
}

fn parsed_configs<'a>(batch: &'a SampleBatch, label: &str) -> Result<Vec<&'a HyperparameterConfig>, StatsError> {
    let configs = batch.configs();
    if configs.len() < 2 {
        return Err(StatsError::InsufficientSamples {
            batch: label.to_owned(),
            got: configs.len(),
        });
    }
    Ok(configs)
}

fn column(configs: &[&HyperparameterConfig], attr: Attribute) -> Vec<f64> {
    configs.iter().map(|c| c.scalar(attr)).collect()
}

fn variability(batch: &SampleBatch, configs: &[&HyperparameterConfig]) -> Result<VariabilityReport, StatsError> {
    let failures = batch.failure_count();
    let attributes = Attribute::ALL
        .iter()
        .map(|&attr| {
            let d = dispersion(&column(configs, attr))?;
            Ok(AttributeVariability {
                attribute: attr.key().to_owned(),
                n: d.n,
                std: d.std,
                variance: d.variance,
                iqr: d.iqr,
                failures,
            })
        })
        .collect::<Result<Vec<_>, StatsError>>()?;
    Ok(VariabilityReport {
        samples: batch.samples.len(),
        parsed: configs.len(),
        failures,
        attributes,
    })
}

fn anova_summary(groups: &[Vec<f64>]) -> Result<AnovaSummary, StatsError> {
    match anova_one_way(groups) {
        Ok(r) => Ok(AnovaSummary {
            f_stat: (!r.f_infinite).then_some(r.f_stat),
            f_infinite: r.f_infinite,
            p_value: r.p_value,
            df_between: r.df_between,
            df_within: r.df_within,
            degenerate: false,
        }),
        Err(StatsError::DegenerateGroups) => {
            let total: usize = groups.iter().map(Vec::len).sum();
            Ok(AnovaSummary {
                f_stat: Some(0.0),
                f_infinite: false,
                p_value: 1.0,
                df_between: groups.len() - 1,
                df_within: total - groups.len(),
                degenerate: true,
            })
        }
        Err(e) => Err(e),
    }
}

fn kruskal_summary(groups: &[Vec<f64>]) -> Result<KruskalSummary, StatsError> {
    match kruskal_wallis(groups) {
        Ok(r) => Ok(KruskalSummary {
            h_stat: r.h_stat,
            p_value: r.p_value,
            df: r.df,
            degenerate: false,
        }),
        Err(StatsError::AllTied) => Ok(KruskalSummary {
            h_stat: 0.0,
            p_value: 1.0,
            df: groups.len() - 1,
            degenerate: true,
        }),
        Err(e) => Err(e),
    }
}

fn token_set(text: &str) -> HashSet<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Variability report for `batch_a`, plus a cross-batch comparison when
/// `batch_b` is given.
pub fn build_reports(
    batch_a: &SampleBatch,
    batch_b: Option<&SampleBatch>,
    test: TestKind,
) -> Result<Reports, StatsError> {
    let configs_a = parsed_configs(batch_a, "batch A")?;
    let variability_a = variability(batch_a, &configs_a)?;
    let Some(batch_b) = batch_b else {
        return Ok(Reports {
            variability: variability_a,
            variability_b: None,
            comparison: None,
        });
    };
    let configs_b = parsed_configs(batch_b, "batch B")?;
    let variability_b = variability(batch_b, &configs_b)?;

    let attributes = Attribute::ALL
        .iter()
        .map(|&attr| {
            let groups = [column(&configs_a, attr), column(&configs_b, attr)];
            Ok(AttributeComparison {
                attribute: attr.key().to_owned(),
                anova: test.anova().then(|| anova_summary(&groups)).transpose()?,
                kruskal: test.kruskal().then(|| kruskal_summary(&groups)).transpose()?,
            })
        })
        .collect::<Result<Vec<_>, StatsError>>()?;

    let tuples = |configs: &[&HyperparameterConfig]| -> HashSet<String> {
        configs.iter().map(|c| c.to_canonical_json()).collect()
    };
    let config_jaccard = jaccard(&tuples(&configs_a), &tuples(&configs_b))?;
    let prompt_jaccard = jaccard(
        &token_set(&batch_a.prompt_text()),
        &token_set(&batch_b.prompt_text()),
    )
    .ok();

    Ok(Reports {
        variability: variability_a,
        variability_b: Some(variability_b),
        comparison: Some(ComparisonReport {
            test,
            attributes,
            config_jaccard,
            prompt_jaccard,
        }),
    })
}
