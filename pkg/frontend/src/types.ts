// Shapes of the wizard service's JSON documents, as served over HTTP.

export type Stage = "Describe" | "Highlights" | "Expansion" | "Generated";

export const STAGE_ORDER: readonly Stage[] = ["Describe", "Highlights", "Expansion", "Generated"];

export const MIN_DESCRIPTION_CHARS = 50;

// The three closed personality enums. The server rejects anything else.
export const TRAIT_OPTIONS = {
  manners: ["Polite", "Rude", "Neutral"],
  socialAnxiety: ["Outgoing", "Shy", "Neutral"],
  optimism: ["Positive", "Negative", "Neutral"],
} as const;

export type TraitField = keyof typeof TRAIT_OPTIONS;

export interface HighlightCard {
  image: string;
  name: string;
  age: number;
  birthday: string;
  gender: string;
  title: string;
  highlights: string[];
  description_qoute: string;
  description: string;
}

export interface PersonalityDoc {
  characteristics: string;
  job: string;
  hobbies: string;
  foodAndDrinks: string;
  others: string;
  manners: string;
  mannersDescription: string;
  socialAnxiety: string;
  socialAnxietyDescription: string;
  optimism: string;
  optimismDescription: string;
}

export interface ScheduleSummaryDoc {
  title: string;
  description: string;
}

export interface ExpansionDoc {
  portraits: string[];
  name: string;
  gender: string;
  age: number;
  birthday: string;
  title: string;
  highlights: string[];
  quote: string;
  summary: string;
  description: string;
  personality: PersonalityDoc;
  dialogues: string[];
  schedules: ScheduleSummaryDoc[];
}

export interface BundleDoc {
  schedule: Record<string, string>;
  dialogues: Record<string, string>;
  giftDialogues: Record<string, string>;
}

export interface GiftPreferencesDoc {
  loves: string[];
  likes: string[];
  dislikes: string[];
  hates: string[];
}

export interface PackInfo {
  files: string[];
  uniqueId: string | null;
}

export interface HistoryRecord {
  from: string;
  to: string;
  at: number;
}

export interface SessionView {
  id: string;
  stage: Stage;
  busy: boolean;
  lastError: string | null;
  description: string;
  highlights: HighlightCard[] | null;
  pinned: number[];
  selected: number | null;
  expansion: ExpansionDoc | null;
  bundle: BundleDoc | null;
  preferences: GiftPreferencesDoc | null;
  notices: string[];
  pack: PackInfo | null;
  history: HistoryRecord[];
}

export interface SessionStatus {
  stage: Stage;
  busy: boolean;
  lastError: string | null;
}
