//! In-memory registry of preprocessing jobs.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }

    fn can_become(self, next: JobStatus) -> bool {
        matches!(
            (self, next),
            (JobStatus::Queued, JobStatus::Running)
                | (JobStatus::Queued, JobStatus::Failed)
                | (JobStatus::Running, JobStatus::Running)
                | (JobStatus::Running, JobStatus::Done)
                | (JobStatus::Running, JobStatus::Failed)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessJob {
    pub job_id: String,
    pub status: JobStatus,
    pub progress: f64,
    pub error: Option<String>,
    /// Lesson id, once the job is done.
    pub result: Option<String>,
}

#[derive(Debug, Default)]
pub struct JobRegistry {
    jobs: Mutex<HashMap<String, PreprocessJob>>,
}

impl JobRegistry {
    pub fn create(&self, job_id: &str) -> PreprocessJob {
        let job = PreprocessJob {
            job_id: job_id.into(),
            status: JobStatus::Queued,
            progress: 0.0,
            error: None,
            result: None,
        };
        self.lock().insert(job_id.into(), job.clone());
        job
    }

    pub fn get(&self, job_id: &str) -> Option<PreprocessJob> {
        self.lock().get(job_id).cloned()
    }

    /// Marks the job running with the given progress. Progress never
    /// decreases.
    pub fn progress(&self, job_id: &str, progress: f64) -> bool {
        self.update(job_id, JobStatus::Running, |job| {
            job.progress = job.progress.max(progress.clamp(0.0, 1.0));
        })
    }

    pub fn finish(&self, job_id: &str, lesson_id: &str) -> bool {
        self.update(job_id, JobStatus::Done, |job| {
            job.progress = 1.0;
            job.result = Some(lesson_id.into());
        })
    }

    pub fn fail(&self, job_id: &str, message: &str) -> bool {
        self.update(job_id, JobStatus::Failed, |job| job.error = Some(message.into()))
    }

    /// Applies a forward transition; anything else is ignored and reported
    /// as `false`.
    fn update(&self, job_id: &str, next: JobStatus, apply: impl FnOnce(&mut PreprocessJob)) -> bool {
        let mut jobs = self.lock();
        match jobs.get_mut(job_id) {
            Some(job) if job.status.can_become(next) => {
                job.status = next;
                apply(job);
                true
            }
            Some(job) => {
                log::warn!("job {job_id}: ignoring {:?} -> {next:?}", job.status);
                false
            }
            None => false,
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<String, PreprocessJob>> {
        self.jobs.lock().unwrap_or_else(|p| p.into_inner())
    }
}
