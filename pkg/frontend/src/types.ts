/** Shared types mirroring the annotation service wire formats. */

export type Label = "GOOD" | "BAD";

export type Justification = "SOCIAL" | "USEFUL" | "INAPPROPRIATE" | "MISLEADING";

export type Axis = "ENGAGING" | "INTERESTING" | "HUMANLIKE" | "KNOWLEDGEABLE";

export type Winner = "LEFT" | "RIGHT";

export interface ContextTurn {
  speaker: string;
  utterance: string;
}

export interface TranscriptTurn {
  speaker: string;
  text: string;
}

export interface CandidatePayload {
  candidate_id: string;
  dialogue_id: string;
  turn_index: number;
  text: string;
  position: "prepend" | "append";
  source: [string, string];
  parent_id: string | null;
}

export interface AnnotationTask {
  task_id: string;
  candidate: CandidatePayload;
  context: ContextTurn[];
  batch_index: number;
  guidance: string;
}

export interface AnnotationRecord {
  candidate_id: string;
  annotator_id: string;
  label: Label;
  justifications: Justification[];
  timestamp: string;
}

export interface ComparisonTask {
  task_id: string;
  axis: Axis;
  prompt: string;
  dialogue_id: string;
  left: TranscriptTurn[];
  right: TranscriptTurn[];
}

export interface JudgmentRecord {
  task_id: string;
  judge_id: string;
  winner: Winner;
  timestamp: string;
}

/** The four comparison questions, shown to judges exactly as written. */
export const AXIS_PROMPTS: Record<Axis, string> = {
  ENGAGING:
    "Who would you prefer to talk to? Which version is more likely to hold " +
    "your attention and make you want to hear more?",
  INTERESTING:
    "Who would you say is more interesting? Which version arouses your " +
    "curiosity or tells you something new or useful?",
  HUMANLIKE:
    "Who would you say sounds more human? Which version is more natural " +
    "and personable?",
  KNOWLEDGEABLE:
    "Who would you say is more knowledgeable? Which version seems more " +
    "well informed and confident in the information?",
};
