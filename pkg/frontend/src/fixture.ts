import type { SegmentInput } from "./types.js";

// Replayable demo capture: the back-pain consult dialogue, one segment per
// turn, for exercising the workspace without live audio.
export const DEMO_SEGMENTS: SegmentInput[] = [
  { start: 0, end: 4, speaker: "doctor", text: "Hi, Bryan. How are you?" },
  { start: 5, end: 9, speaker: "patient", text: "I'm doing well. I'm a little sore." },
  {
    start: 10,
    end: 14,
    speaker: "doctor",
    text:
      "So, Bryan is a 55-year-old male with a past medical history significant for a prior " +
      "discectomy, presenting with back pain. So, Bryan, what happened to your back?",
  },
  {
    start: 15,
    end: 19,
    speaker: "patient",
    text:
      "You know... my wife made me push, uh, a refrigerator through the other room, and when " +
      "I was helping move it, I felt something in my back on the lower right side.",
  },
  { start: 20, end: 24, speaker: "doctor", text: "Okay, on the lower right side of your back?" },
  { start: 25, end: 29, speaker: "patient", text: "Yes." },
  { start: 30, end: 34, speaker: "doctor", text: "Okay. Those wives, always making you do stuff!" },
  { start: 35, end: 39, speaker: "patient", text: "Yes." },
  { start: 40, end: 44, speaker: "doctor", text: "And what day did this happen? How long ago?" },
  { start: 45, end: 49, speaker: "patient", text: "Uh, this was about five days ago." },
];
