pub mod bounds;
pub mod data;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod learners;
pub mod lemma_lab;
pub mod loss;
pub mod seeding;
pub mod stats;
pub mod trial;
