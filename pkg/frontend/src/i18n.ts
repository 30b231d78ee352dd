// Bilingual chrome strings. Knowledge-base content is never translated or
// altered; it renders verbatim inside RTL containers.

export type Locale = "ar" | "en";

const STRINGS = {
  title: { ar: "خدمة استشارات اللوائح", en: "Regulation Consultation Service" },
  consult: { ar: "استشارة", en: "Consult" },
  admin: { ar: "إدارة المعرفة", en: "Knowledge Admin" },
  pickRegulation: { ar: "اختر اللائحة", en: "Pick a regulation" },
  rules: { ar: "قاعدة", en: "rules" },
  noModels: { ar: "لا توجد لوائح في قاعدة المعرفة", en: "The knowledge base has no regulations" },
  loadFailed: { ar: "تعذر الاتصال بالخدمة", en: "Could not reach the service" },
  retry: { ar: "إعادة المحاولة", en: "Retry" },
  question: { ar: "السؤال", en: "Question" },
  freeAnswer: { ar: "أدخل القيمة", en: "Enter a value" },
  submit: { ar: "إجابة", en: "Answer" },
  answered: { ar: "إجاباتك", en: "Your answers" },
  change: { ar: "تغيير", en: "Change" },
  noQuestions: { ar: "لا أسئلة متبقية", en: "No questions left" },
  sure: { ar: "نتائج مؤكدة", en: "Sure results" },
  expected: { ar: "نتائج متوقعة", en: "Expected results" },
  excluded: { ar: "مستبعدة", en: "Excluded" },
  none: { ar: "لا شيء بعد", en: "nothing yet" },
  explain: { ar: "لماذا؟", en: "Why?" },
  explanationTitle: { ar: "التعليل", en: "Reasoning" },
  close: { ar: "إغلاق", en: "Close" },
  backToPicker: { ar: "لائحة أخرى", en: "Another regulation" },
  adminToken: { ar: "رمز الإدارة", en: "Admin token" },
  load: { ar: "تحميل", en: "Load" },
  upload: { ar: "رفع", en: "Upload" },
  ontologyDoc: { ar: "وثيقة الأنطولوجيا", en: "Ontology document" },
  rulesDoc: { ar: "وثيقة القواعد", en: "Rules document" },
  uploadOk: { ar: "تم الرفع، إصدار قاعدة المعرفة الآن", en: "Uploaded, knowledge base version is now" },
  conflict: {
    ar: "تغيّرت قاعدة المعرفة أثناء التحرير؛ أعد التحميل",
    en: "The knowledge base changed underneath you; reload it",
  },
  unauthorized: { ar: "رمز الإدارة مفقود أو خاطئ", en: "Missing or bad admin token" },
  issues: { ar: "مشاكل الوثيقة", en: "Document issues" },
  runLint: { ar: "فحص الاتساق", en: "Run lint" },
  lintClean: { ar: "كل رموز القواعد موجودة في الأنطولوجيا", en: "Every rule token resolves in the ontology" },
  pending: { ar: "جارٍ التنفيذ…", en: "Working…" },
} as const;

export type StringKey = keyof typeof STRINGS;

export function t(locale: Locale, key: StringKey): string {
  return STRINGS[key][locale];
}

export function chromeDir(locale: Locale): "rtl" | "ltr" {
  return locale === "ar" ? "rtl" : "ltr";
}
