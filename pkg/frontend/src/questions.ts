/** The seven review questions with their three anchored score levels. */

import type { MetricKey } from "./types.js";

export interface Question {
  metric: MetricKey;
  text: string;
  anchors: { 1: string; 2: string; 3: string };
}

export const QUESTIONS: Question[] = [
  {
    metric: "overall_quality",
    text: "This is a good explanation",
    anchors: {
      1: "Disagree: The explanation is illogical or inconsistent with the question and/or does not adequately cover the answer choices.",
      2: "Neutral: The explanation is somewhat logical and consistent with the question but might miss some aspects of the answer choices.",
      3: "Agree: The explanation is logical, consistent with the question, and adequately covers the answer choices.",
    },
  },
  {
    metric: "understandability",
    text: "I understand this explanation of how the AI model works.",
    anchors: {
      1: "Disagree: The explanation is unclear or contains overly complex terms or convoluted sentences.",
      2: "Neutral: The explanation is somewhat understandable but might contain complex terms or convoluted sentences.",
      3: "Agree: The explanation is clear, concise, and easy to understand.",
    },
  },
  {
    metric: "trustworthiness",
    text: "I trust this explanation of how the AI model works.",
    anchors: {
      1: "Disagree: The explanation is unclear or contains overly complex terms or convoluted sentences.",
      2: "Neutral: The explanation is somewhat credible but contains some elements that I find doubtful or questionable.",
      3: "Agree: The explanation is credible and aligns with my understanding of how AI models work.",
    },
  },
  {
    metric: "satisfaction",
    text: "This explanation of how the AI model works is satisfying.",
    anchors: {
      1: "Disagree: The explanation does not meet my expectations and leaves many questions unanswered.",
      2: "Neutral: The explanation somewhat meets my expectations but leaves some questions unanswered.",
      3: "Agree: The explanation meets my expectations and satisfies my query.",
    },
  },
  {
    metric: "sufficiency",
    text: "This explanation of how the AI model works has sufficient detail.",
    anchors: {
      1: "Disagree: The explanation lacks detail and does not adequately cover the AI model's decision-making.",
      2: "Neutral: The explanation provides some detail but lacks thoroughness in covering the AI model's decision-making.",
      3: "Agree: The explanation is thorough and covers all aspects of the AI model's decision-making.",
    },
  },
  {
    metric: "completeness",
    text: "This explanation of how the AI model works seems complete.",
    anchors: {
      1: "Disagree: The explanation does not adequately cover the answer choices and leaves many aspects unexplained.",
      2: "Neutral: The explanation covers most answer choices but leaves some aspects unexplained.",
      3: "Agree: The explanation covers all answer choices and leaves no aspect unexplained.",
    },
  },
  {
    metric: "accuracy",
    text: "This explanation of how the AI model works is accurate.",
    anchors: {
      1: "Disagree: The explanation does not accurately reflect the AI model's decision-making.",
      2: "Neutral: The explanation somewhat reflects the AI model's decision-making but contains some inaccuracies.",
      3: "Agree: The explanation accurately reflects the AI model's decision-making.",
    },
  },
];
