// Wire shapes as the gateway returns them. Kept loose on purpose: the server
// is the authority and extra fields must never break rendering.

export type Role = "farmer" | "agronomist" | "merchant";

export interface UserView {
  id: string;
  name: string;
  role: Role;
  contact: Record<string, string>;
  created_at: number;
}

export interface Session {
  user: UserView;
  token: string;
}

export interface Farm {
  id: string;
  farmer_id: string;
  name: string;
  locality: string;
  created_at: number;
}

export interface Crop {
  id: string;
  farm_id: string;
  farmer_id: string;
  kind: string;
  planted_at: string;
  notes: string;
  created_at: number;
}

export interface Prediction {
  label: string;
  class_index: number;
  probabilities: number[];
  model_version: string;
}

// attachments is null until the pipeline has run; afterwards it carries the
// two index summaries, the two heatmap blob digests, and the model prediction
export interface DiagnosisRequest {
  id: string;
  sample_id: string;
  farmer_id: string;
  crop_id: string;
  state: "submitted" | "processed" | "assigned" | "diagnosed";
  attachments: {
    tgi?: any;
    grvi?: any;
    tgi_heatmap?: string;
    grvi_heatmap?: string;
    prediction?: Prediction;
  } | null;
  agronomist_id: string | null;
  created_at: number;
  updated_at: number;
}

export interface DiagnosisReport {
  request_id: string;
  agronomist_id: string;
  diagnosis: string;
  confirmed_label: string | null;
  recommendations: string;
  filed_at: number;
}

export interface OfferEntry {
  listing_id?: string;
  seq: number;
  merchant_id: string;
  amount: number;
  placed_at: number;
}

export interface Listing {
  id: string;
  farmer_id: string;
  product: string;
  quantity: number;
  unit: string;
  description: string;
  photo_refs: string[];
  crop_id: string;
  starting_price: number;
  ends_at: number;
  created_at: number;
  status: "open" | "closed_sold" | "closed_unsold";
  offers: OfferEntry[];
  best_offer: number | null;
}

export interface Purchase {
  listing_id: string;
  farmer_id: string;
  merchant_id: string;
  product: string;
  final_price: number;
  farmer_contact: Record<string, string>;
  merchant_contact: Record<string, string>;
  closed_at: number;
}

export interface Thread {
  id: string;
  participants: string[];
  created_at: number;
  names?: Record<string, string>;
}

export interface Message {
  thread_id: string;
  seq: number;
  sender_id: string;
  body: string;
  sent_at: number;
}

export interface UsageStats {
  users_total: number;
  farmers: number;
  agronomists: number;
  merchants: number;
  chats: number;
  samples: number;
  products: number;
  messages: number;
  farms: number;
  crops: number;
}

export interface Trend {
  days: string[];
  counts: number[];
  fitted: number[];
  lower: number[];
  upper: number[];
  span: number;
  degree: number;
}

export interface Frame {
  type: string;
  topic: string;
  seq: number;
  payload: any;
}

export const CLASS_LABELS = [
  "alternaria",
  "acarus",
  "canker",
  "magnesium_deficiency",
  "zinc_deficiency",
  "healthy",
] as const;
