// Pure presentation helpers shared by pages and tests.

export const WEEK_DAYS = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"] as const;

// Day-of-month dialogue keys run 1-10, no leading zeros.
const MONTH_DAY = /^(?:[1-9]|10)$/;

export type DialoguePair = [string, string];

export interface DialogueGroups {
  monthDays: DialoguePair[];
  weekDays: DialoguePair[];
  locations: DialoguePair[];
}

export function groupDialogues(dialogues: Record<string, string>): DialogueGroups {
  const monthDays: DialoguePair[] = [];
  const weekDays: DialoguePair[] = [];
  const locations: DialoguePair[] = [];
  for (const [key, line] of Object.entries(dialogues)) {
    if (MONTH_DAY.test(key)) monthDays.push([key, line]);
    else if ((WEEK_DAYS as readonly string[]).includes(key)) weekDays.push([key, line]);
    else locations.push([key, line]);
  }
  const weekRank = (day: string): number => (WEEK_DAYS as readonly string[]).indexOf(day);
  monthDays.sort((a, b) => Number(a[0]) - Number(b[0]));
  weekDays.sort((a, b) => weekRank(a[0]) - weekRank(b[0]));
  locations.sort((a, b) => (a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0));
  return { monthDays, weekDays, locations };
}
