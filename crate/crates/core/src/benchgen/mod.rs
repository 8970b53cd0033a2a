//! Negation and implicature test-split generation, plus quality control.

mod annotation;
mod quality;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use annotation::{
    annotation_stats, format_count, read_responses, render_table, sample_for_annotation,
    write_sheet, Annotation, AnnotationRow, AnnotationStats, Answer, PoolStats, QUESTION_1,
    QUESTION_2,
};
pub use quality::{bleu, meteor, quality_metrics, rouge_l, tokenize, QualityReport, QualityScores, RefScope};

use crate::assets::PromptAssets;
use crate::error::{Error, Result};
use crate::llm::{strip_quotes, split_list, ChatModel, ChatRequest};
use crate::types::{IntentId, IntentLabel, Source, Split, Utterance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationKind {
    Negation,
    Implicature,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationJob {
    pub kind: GenerationKind,
    pub intents: Vec<IntentLabel>,
    #[serde(default)]
    pub source_utterances: Vec<Utterance>,
    pub scenarios_per_intent: usize,
    pub utterances_per_scenario: usize,
}

impl GenerationJob {
    pub fn negation(intents: Vec<IntentLabel>, sources: Vec<Utterance>) -> Self {
        GenerationJob {
            kind: GenerationKind::Negation,
            intents,
            source_utterances: sources,
            scenarios_per_intent: 10,
            utterances_per_scenario: 3,
        }
    }

    pub fn implicature(intents: Vec<IntentLabel>) -> Self {
        GenerationJob {
            kind: GenerationKind::Implicature,
            intents,
            source_utterances: Vec::new(),
            scenarios_per_intent: 10,
            utterances_per_scenario: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GenerationKind::Negation if self.source_utterances.is_empty() => {
                Err(Error::invalid("negation job needs source utterances"))
            }
            GenerationKind::Implicature if !self.source_utterances.is_empty() => {
                Err(Error::invalid("implicature job takes no source utterances"))
            }
            _ => Ok(()),
        }
    }
}

/// Where a generated utterance came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub id: String,
    pub template_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negated_intent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GenerationOutput {
    pub utterances: Vec<Utterance>,
    pub provenance: Vec<Provenance>,
    /// Items lost to empty or unparseable responses.
    pub skipped: usize,
    pub warnings: Vec<String>,
}

/// First non-empty line of a response, unquoted and trimmed.
fn first_line(response: &str) -> Option<String> {
    response
        .lines()
        .map(|l| strip_quotes(l.trim()).trim().to_string())
        .find(|l| !l.is_empty())
}

/// One negation per source utterance, rewritten toward a negated intent
/// sampled with `seed` from the source intent's negated names.
pub fn generate_negations(
    job: &GenerationJob,
    chat: &dyn ChatModel,
    prompts: &PromptAssets,
    seed: u64,
) -> Result<GenerationOutput> {
    job.validate()?;
    let template = prompts.require("negation")?;
    let labels: HashMap<&IntentId, &IntentLabel> = job.intents.iter().map(|l| (&l.id, l)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GenerationOutput::default();

    for src in &job.source_utterances {
        let label = labels
            .get(&src.intent)
            .ok_or_else(|| Error::invalid(format!("unknown intent `{}`", src.intent)))?;
        if label.negated_names.is_empty() {
            return Err(Error::MissingNegatedName(label.id.0.clone()));
        }
        let negated = label
            .negated_names
            .choose(&mut rng)
            .expect("non-empty negated names");
        let req = ChatRequest::from_template(
            chat.default_model(),
            template,
            &[
                ("utterance", src.text.as_str()),
                ("intent", label.name.as_str()),
                ("negated_intent", negated.as_str()),
            ],
        )?;
        let Some(text) = first_line(&chat.complete(&req)?) else {
            out.skipped += 1;
            continue;
        };
        let id = format!("{}::neg", src.id);
        out.provenance.push(Provenance {
            id: id.clone(),
            template_id: template.id.clone(),
            source_id: Some(src.id.clone()),
            negated_intent: Some(negated.clone()),
            scenario: None,
        });
        out.utterances.push(Utterance::new(
            id,
            text,
            src.intent.clone(),
            Split::Negation,
            Source::LlmGenerated,
        )?);
    }
    Ok(out)
}

/// Two-stage implicature generation: brainstorm scenarios per intent, then
/// utterances per scenario. Short lists are accepted with a warning.
pub fn generate_implicatures(
    job: &GenerationJob,
    chat: &dyn ChatModel,
    prompts: &PromptAssets,
) -> Result<GenerationOutput> {
    job.validate()?;
    let scen_t = prompts.require("implicature-scenarios")?;
    let utt_t = prompts.require("implicature-utterances")?;
    let n_scen = job.scenarios_per_intent.to_string();
    let n_utt = job.utterances_per_scenario.to_string();
    let mut out = GenerationOutput::default();

    for label in &job.intents {
        let req = ChatRequest::from_template(
            chat.default_model(),
            scen_t,
            &[("intent", label.name.as_str()), ("count", n_scen.as_str())],
        )?;
        let mut scenarios = split_list(&chat.complete(&req)?);
        if scenarios.is_empty() {
            out.skipped += 1;
            out.warnings
                .push(format!("intent `{}`: no scenarios parsed, skipped", label.id));
            continue;
        }
        if scenarios.len() < job.scenarios_per_intent {
            out.warnings.push(format!(
                "intent `{}`: {} of {} scenarios",
                label.id,
                scenarios.len(),
                job.scenarios_per_intent
            ));
        }
        scenarios.truncate(job.scenarios_per_intent);

        for (s, scenario) in scenarios.iter().enumerate() {
            let req = ChatRequest::from_template(
                chat.default_model(),
                utt_t,
                &[
                    ("intent", label.name.as_str()),
                    ("scenario", scenario.as_str()),
                    ("count", n_utt.as_str()),
                ],
            )?;
            let mut items = split_list(&chat.complete(&req)?);
            if items.len() < job.utterances_per_scenario {
                out.warnings.push(format!(
                    "intent `{}` scenario {s}: {} of {} utterances",
                    label.id,
                    items.len(),
                    job.utterances_per_scenario
                ));
            }
            items.truncate(job.utterances_per_scenario);
            for (k, text) in items.into_iter().enumerate() {
                let id = format!("imp-{}-{s}-{k}", label.id);
                out.provenance.push(Provenance {
                    id: id.clone(),
                    template_id: utt_t.id.clone(),
                    source_id: None,
                    negated_intent: None,
                    scenario: Some(scenario.clone()),
                });
                out.utterances.push(Utterance::new(
                    id,
                    text,
                    label.id.clone(),
                    Split::Implicature,
                    Source::LlmGenerated,
                )?);
            }
        }
    }
    Ok(out)
}
