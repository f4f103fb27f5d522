import type { ApiClient } from "../api.js";
import type { RtSocket } from "../rt.js";
import type { Store } from "../state.js";

export interface Ctx {
  api: ApiClient;
  store: Store;
  rt: RtSocket | null;
  maxUpload: number;
}
