use cablegrip_core::scene::Scene;
use cablegrip_core::tasks::TaskScript;

use crate::format::{parse_scene, parse_task};

pub const Z230_SCENE: &str = include_str!("../data/z230.scene");

/// File stem and text of every bundled task.
pub const TASK_FILES: [(&str, &str); 5] = [
    ("task1", include_str!("../data/tasks/task1.task")),
    ("task2_ssd", include_str!("../data/tasks/task2_ssd.task")),
    ("task3a", include_str!("../data/tasks/task3a.task")),
    ("task3b", include_str!("../data/tasks/task3b.task")),
    ("task3b_naive", include_str!("../data/tasks/task3b_naive.task")),
];

pub fn z230_scene() -> Scene {
    parse_scene(Z230_SCENE).expect("bundled scene is valid")
}

/// task1, task2, task3a, task3b and the task3b_naive control, in that order.
pub fn builtin_tasks() -> Vec<TaskScript> {
    TASK_FILES
        .iter()
        .map(|(_, text)| parse_task(text).expect("bundled task is valid"))
        .collect()
}

/// Looks a bundled task up by id or file stem.
pub fn builtin_task(name: &str) -> Option<TaskScript> {
    TASK_FILES
        .iter()
        .map(|(stem, text)| (stem, parse_task(text).expect("bundled task is valid")))
        .find(|(stem, task)| **stem == name || task.id == name)
        .map(|(_, task)| task)
}
